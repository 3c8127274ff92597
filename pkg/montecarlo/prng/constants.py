# Generator parameters.
#
# MRG32k3a: P. L'Ecuyer, "Good Parameter Sets for Combined Multiple Recursive
# Random Number Generators", Operations Research 47(1), 1999, and the
# RngStreams package (L'Ecuyer, Simard, Chen, Kelton, Operations Research
# 50(6), 2002) for the default seed and the 2**127 stream spacing.
#
# xorshift128: G. Marsaglia, "Xorshift RNGs", Journal of Statistical
# Software 8(14), 2003, the (11, 8, 19) full-period triple.

MRG_M1 = 4294967087  # 2**32 - 209
MRG_M2 = 4294944443  # 2**32 - 22853

MRG_A12 = 1403580
MRG_A13N = 810728
MRG_A21 = 527612
MRG_A23N = 1370589

# 1 / (m1 + 1)
MRG_NORM = 2.328306549295727688e-10

MRG_DEFAULT_SEED = (12345, 12345, 12345, 12345, 12345, 12345)

# Transition matrices acting on the column (x[n-3], x[n-2], x[n-1]).
MRG_A1 = (
    (0, 1, 0),
    (0, 0, 1),
    (MRG_M1 - MRG_A13N, MRG_A12, 0),
)
MRG_A2 = (
    (0, 1, 0),
    (0, 0, 1),
    (MRG_M2 - MRG_A23N, 0, MRG_A21),
)

# Master seeds are spaced this many draws apart.
MRG_SEED_SPACING = 2 ** 127

XORSHIFT_SHIFTS = (11, 8, 19)
XORSHIFT_WORDS = 4
XORSHIFT_MASK = 0xFFFFFFFF
XORSHIFT_NORM = 2.0 ** -32

DEFAULT_BLOCK_LENGTH = 2 ** 40

# Box-Muller consumes two uniforms per pair of normals.
UNIFORMS_PER_GAUSSIAN_PAIR = 2
