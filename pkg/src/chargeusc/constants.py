"""Physical constants (CODATA, via scipy) and unit conversions."""

import numpy as np
from scipy import constants as _c

hbar = _c.hbar
h = _c.h
e = _c.e
k_B = _c.k
#: Cooper-pair charge 2e
cooper_pair_charge = 2 * e
#: reduced flux quantum hbar/2e
reduced_flux_quantum = hbar / (2 * e)
#: reduced quantum resistance hbar/(2e)^2, about 1.0267 kOhm
R_Q = hbar / (2 * e) ** 2

fF = 1e-15
nH = 1e-9
GHz = 1e9
MHz = 1e6
mK = 1e-3
ns = 1e-9
kOhm = 1e3


def ghz_to_rad(f_ghz):
    """Ordinary frequency in GHz to angular frequency in rad/s."""
    return 2 * np.pi * f_ghz * GHz


def rad_to_ghz(omega):
    return omega / (2 * np.pi * GHz)


def ghz_to_joule(f_ghz):
    """Energy given as E/h in GHz to joules."""
    return h * f_ghz * GHz


def joule_to_ghz(energy):
    return energy / (h * GHz)
