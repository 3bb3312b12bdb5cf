"""qcell: exact invariants and automorphism-rigidity certificates for
quantum Schubert cell algebras and quantized nilradicals."""

from qcell.qpoly import QScalar, q_int, q_factorial, q_hat
from qcell.rootsys import (CartanType, ReducedWord, WeylElement, cartan_matrix,
                           bilinear_matrix, positive_roots, reflect, apply_word,
                           longest_word, parabolic_word, radical_roots,
                           eta_and_px, fundamental_weight, fundamental_coweight,
                           commutation_exponent, theta_degrees)

__version__ = "0.1.0"
