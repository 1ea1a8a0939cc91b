"""Finite simple quotients of free and surface groups.

Subpackages cover PSL(2,p) arithmetic (psl2), free-group words and
automorphisms (freegrp), enumeration of quotient-defining subgroup classes
(defsub), permutation groups with stabilizer chains (permgrp), residual
finiteness witnesses (rfwitness), surface group and handlebody machinery
(surface), and the command-line front end (cli).
"""

__version__ = "0.1.0"
