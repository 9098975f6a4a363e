"""Physical constants (SI) and isotope data used across the toolkit."""

import math

HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23  # J/K
E_CHARGE = 1.602176634e-19  # C
EPS0 = 8.8541878128e-12  # F/m
MU0 = 4.0e-7 * math.pi  # T m / A
ATOMIC_MASS = 1.66053906660e-27  # kg

M_YB171 = 170.936323 * ATOMIC_MASS

# hyperfine-qubit gyromagnetic ratio used in the trapped-ion chapters
GAMMA_E_ION = 2 * math.pi * 2.8e10  # rad/s per tesla ( = (2pi) 2.8 MHz/G)

# NV electronic spin; note the sign
GAMMA_E_NV = -2 * math.pi * 28.024e9  # rad/s per tesla
NV_ZERO_FIELD_SPLITTING = 2 * math.pi * 2.87e9  # rad/s

GAMMA_H1 = 2 * math.pi * 42.577e6  # rad/s per tesla
GAMMA_C13 = 2 * math.pi * 10.708e6  # rad/s per tesla
