"""Integer codes for the closed catalog of analytic fields.

Both kernel lanes (numba and numpy) dispatch on these codes, so a field
that carries a descriptor can be evaluated inside hot loops without
calling back into Python.
"""

CONST = 1        # par = [value]
GAUSSIAN = 2     # par = [amp, scale, c1..cn]
BUBBLE = 3       # par = [scale, q, c1..cn];  u = (s / (s^2 + |y-c|^2))^q
DEGENERATE = 4   # par = [width];  w = y1^3 * exp(-|y|^2 / width^2)
X1GAUSS = 5      # par = [amp, scale];  w = amp * y1 * exp(-|y|^2 / scale^2)
LINEAR_X1 = 6    # par = [];  u = y1
HALFCIRCLE = 7   # par = [];  u = sqrt(max(1 - y1^2, 0)), n = 1 only
POWBUMP = 8      # par = [amp, q, scale];  amp * y1^(-q) * exp(-|y|^2 / scale^2)

# w-descriptor modes
W_DIRECT = 0     # the coded field is the anti-symmetric function itself
W_REFLECT = 1    # w(y) = u(reflect(y, lam)) - u(y) built from a base field u
