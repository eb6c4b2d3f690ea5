"""Published reference numbers, transcribed once and frozen here.

Threshold grids live in ``data/published_thresholds.csv``.
"""
from pathlib import Path

DATA = Path(__file__).parent / "data"

MEN = [
    [145, 402, 84, 5, 3],
    [112, 414, 74, 13, 2],
    [80, 331, 82, 24, 4],
    [54, 231, 102, 22, 6],
    [30, 219, 119, 53, 12],
    [18, 125, 110, 35, 4],
    [9, 67, 65, 25, 8],
]
WOMEN = [
    [98, 387, 83, 13, 3],
    [108, 395, 90, 22, 4],
    [67, 327, 99, 17, 4],
    [36, 238, 134, 28, 10],
    [23, 195, 187, 53, 18],
    [26, 142, 174, 63, 16],
    [11, 69, 92, 41, 9],
]

# (table, lambda token) -> (estimate, simple interval, Fisher interval)
HEALTH_SURVEY = {
    ("men", "0"): (0.344, (0.314, 0.375), (0.313, 0.375)),
    ("men", "2/3"): (0.340, (0.310, 0.370), (0.310, 0.369)),
    ("men", "1"): (0.336, (0.307, 0.365), (0.306, 0.364)),
    ("women", "0"): (0.381, (0.352, 0.410), (0.351, 0.410)),
    ("women", "2/3"): (0.374, (0.347, 0.402), (0.346, 0.401)),
    ("women", "1"): (0.367, (0.341, 0.393), (0.341, 0.392)),
}
HEALTH_BASELINES = {
    "men": {"u_total": 0.042, "cramers_v2": 0.032},
    "women": {"u_total": 0.050, "cramers_v2": 0.039},
}

# Exact latent tables: (rho, r) -> (polychoric, rho_(-1/2), rho_(0), rho_(2/3), rho_(1))
EXACT_LAMBDAS = (-0.5, 0.0, 2 / 3, 1.0)
EXACT_TABLE = {
    (0.2, 10): (0.20001, 0.19183, 0.19187, 0.19119, 0.19051),
    (0.2, 15): (0.20000, 0.19517, 0.19520, 0.19465, 0.19411),
    (0.2, 25): (0.20000, 0.19748, 0.19750, 0.19711, 0.19671),
    (0.2, 50): (0.20000, 0.19894, 0.19895, 0.19872, 0.19848),
    (0.5, 10): (0.50001, 0.48070, 0.48070, 0.47104, 0.46080),
    (0.5, 15): (0.50002, 0.48861, 0.48856, 0.48062, 0.47159),
    (0.5, 25): (0.50002, 0.49406, 0.49401, 0.48808, 0.48065),
    (0.5, 50): (0.50002, 0.49750, 0.49746, 0.49366, 0.48820),
    (0.8, 10): (0.80000, 0.77771, 0.77425, 0.74410, 0.70509),
    (0.8, 15): (0.80001, 0.78734, 0.78472, 0.75937, 0.72219),
    (0.8, 25): (0.80001, 0.79372, 0.79194, 0.77200, 0.73773),
    (0.8, 50): (0.80001, 0.79753, 0.79654, 0.78245, 0.75242),
}

# Coverage of 95% intervals, r = 4: (rho, n, method) -> {lambda: coverage}
COVERAGE_R4 = {
    (0.5, 3000, "simple"): {-0.5: 0.94562, 0.0: 0.94573, 2 / 3: 0.94623, 1.0: 0.94602},
    (0.5, 10000, "simple"): {-0.5: 0.94901, 0.0: 0.94934, 2 / 3: 0.94965, 1.0: 0.94949},
    (0.8, 3000, "simple"): {-0.5: 0.93225, 0.0: 0.94529, 2 / 3: 0.94889, 1.0: 0.94918},
    (0.8, 10000, "simple"): {-0.5: 0.94546, 0.0: 0.94745, 2 / 3: 0.94859, 1.0: 0.94855},
    (0.5, 3000, "fisher"): {-0.5: 0.94694, 0.0: 0.94723, 2 / 3: 0.94729, 1.0: 0.94721},
    (0.5, 10000, "fisher"): {-0.5: 0.94932, 0.0: 0.94981, 2 / 3: 0.95003, 1.0: 0.94977},
    (0.8, 3000, "fisher"): {-0.5: 0.93491, 0.0: 0.94703, 2 / 3: 0.94979, 1.0: 0.94979},
    (0.8, 10000, "fisher"): {-0.5: 0.94603, 0.0: 0.94793, 2 / 3: 0.94903, 1.0: 0.94861},
}
# r = 8, rho = 0.2, n = 3000
COVERAGE_SPARSE = {
    "simple": {-0.5: 0.42124, 0.0: 0.41906, 2 / 3: 0.42681, 1.0: 0.43376},
    "fisher": {-0.5: 0.42739, 0.0: 0.42520, 2 / 3: 0.43284, 1.0: 0.44016},
}
