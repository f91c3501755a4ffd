"""Exact combinatorics for (Z/2)^r covers of blown-up quadrics, class T germs and RDP involutions."""

from . import (construction, cover_data, divisor_lattice, f2_groups, lens_topology,
               quotient_sings, rdp_actions)

__version__ = "0.1.0"

__all__ = ["construction", "cover_data", "divisor_lattice", "f2_groups", "lens_topology",
           "quotient_sings", "rdp_actions", "__version__"]
