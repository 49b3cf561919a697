"""Frozen reference values, computed once with mpmath at 30 digits.

Roots of coth t = t and k tanh(kt) = l coth(lt) by mpmath.findroot;
r^2, the boundary conformal factor and the Hopf values from the closed
forms at those roots.
"""

T_CATENOID = 1.19967864025773383391636984864
T_FS = {
    (2, 1): 0.658478948462408354312523173654,
    (3, 1): 0.41572147276465526891312125977,
    (3, 2): 0.481211825059603447497758913424,
}
R2_FS = {(2, 1): 6.0, (3, 1): 5.19615242270663188058233902452, (3, 2): 31.25}
E2W_T_UNIT_FS = {(2, 1): 3.0, (3, 1): 6.46410161513775458705489268301, (3, 2): 7.2}
R2_CATENOID = 4.71594637111871774808796341263  # cosh^2(t10) + t10^2

# |u_tt^perp|^2 - |u_ttheta^perp|^2, unit scaling
HOPF_FS = {(2, 1): 2.0, (3, 1): 13.856406460551018348219570732, (3, 2): 5.76}
HOPF_CATENOID = {1: 0.212046516500733615969937782301, 2: 3.39274426401173785551900451681,
                 3: 17.1757678365594228935649603664}
HOPF_FS21_RAW = 12.0

# Galerkin counts (n_t = 48, n_theta_max = 8 and one refinement)
MORSE = {"catenoid(q=1)": 4, "mobius": 5, "fs(k=2,l=1)": 13, "fs(k=3,l=1)": 19}
NULLITY_BAND = {"catenoid(q=1)": 2, "mobius": 5, "fs(k=2,l=1)": 5, "fs(k=3,l=1)": 5}
IND_S = {"catenoid(q=1)": 1, "mobius": 1, "fs(k=2,l=1)": 4, "fs(k=3,l=1)": 6}
IND_E = {"catenoid(q=1)": 3, "mobius": 4, "fs(k=2,l=1)": 16, "fs(k=3,l=1)": 24}
