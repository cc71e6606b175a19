"""Physical constants (CODATA 2022) and unit conversion factors.

Internally every length is in angstroms and every spatial frequency in
1/angstrom. Public interfaces accept nm / um / mm and convert here at the
boundary.
"""

PLANCK_H = 6.62607015e-34  # J*s
ELECTRON_MASS = 9.1093837139e-31  # kg
ELEMENTARY_CHARGE = 1.602176634e-19  # C
SPEED_OF_LIGHT = 299792458.0  # m/s

A_PER_NM = 10.0
A_PER_UM = 1.0e4
A_PER_MM = 1.0e7
A_PER_METER = 1.0e10
