"""Published skew-t benchmark values keyed by (k, nu, delta1, method).

Entries are ``(mean, sd)``; ``sd`` is ``None`` for the deterministic rows.
"""

DELTAS = (0.0, 0.5, 0.99)

_ROWS = {
    (2, 3.0): {
        "L1": ((-0.51, None), (-0.51, None), (-0.60, None)),
        "L2": ((0.09, 0.02), (0.07, 0.02), (-0.30, 0.02)),
        "CL1": ((-0.16, None), (-0.17, None), (-0.17, None)),
        "CL2": ((0.20, 0.02), (0.18, 0.03), (0.09, 0.03)),
        "TC": ((0.04, 0.03), (0.03, 0.02), (-0.01, 0.02)),
        "LB": ((0.00, 0.01), (0.00, 0.01), (0.00, 0.01)),
        "CLB": ((0.00, 0.00), (0.00, 0.00), (0.00, 0.01)),
    },
    (2, 10.0): {
        "L1": ((-0.18, None), (-0.18, None), (-0.34, None)),
        "L2": ((-0.03, 0.01), (-0.04, 0.02), (-0.27, 0.02)),
        "CL1": ((-0.05, None), (-0.05, None), (-0.05, None)),
        "CL2": ((0.07, 0.03), (0.07, 0.03), (0.04, 0.03)),
        "TC": ((0.02, 0.03), (0.02, 0.03), (0.01, 0.03)),
        "LB": ((0.00, 0.00), (0.00, 0.00), (0.00, 0.01)),
        "CLB": ((0.00, 0.00), (0.00, 0.00), (0.00, 0.00)),
    },
    (5, 3.0): {
        "L1": ((-1.55, None), (-1.55, None), (-1.69, None)),
        "L2": ((1.08, 0.03), (1.02, 0.03), (0.50, 0.04)),
        "CL1": ((-1.04, None), (-1.05, None), (-1.06, None)),
        "CL2": ((0.66, 0.04), (0.60, 0.05), (0.32, 0.06)),
        "TC": ((0.08, 0.05), (0.04, 0.05), (-0.01, 0.06)),
        "LB": ((0.00, 0.01), (0.00, 0.01), (0.00, 0.02)),
        "CLB": ((0.00, 0.01), (0.00, 0.01), (0.00, 0.01)),
    },
    (5, 10.0): {
        "L1": ((-0.68, None), (-0.68, None), (-0.85, None)),
        "L2": ((-0.31, 0.03), (0.30, 0.03), (0.08, 0.04)),
        "CL1": ((-0.42, None), (-0.42, None), (-0.42, None)),
        "CL2": ((0.18, 0.05), (0.16, 0.04), (0.08, 0.05)),
        "TC": ((0.06, 0.04), (0.05, 0.05), (-0.04, 0.07)),
        "LB": ((0.00, 0.01), (0.00, 0.01), (0.00, 0.01)),
        "CLB": ((0.00, 0.00), (0.00, 0.00), (0.00, 0.00)),
    },
    (10, 3.0): {
        "L1": ((-3.58, None), (-3.58, None), (-3.74, None)),
        "L2": ((3.89, 0.07), (3.72, 0.08), (2.89, 0.06)),
        "CL1": ((-2.97, None), (-2.97, None), (-2.98, None)),
        "CL2": ((2.91, 0.08), (2.76, 0.08), (2.15, 0.08)),
        "TC": ((0.16, 0.07), (0.03, 0.08), (-0.48, 0.34)),
        "LB": ((0.00, 0.03), (0.00, 0.03), (0.00, 0.04)),
        "CLB": ((0.00, 0.01), (0.00, 0.02), (0.01, 0.01)),
    },
    (10, 10.0): {
        "L1": ((-1.89, None), (-1.89, None), (-2.07, None)),
        "L2": ((1.51, 0.04), (1.48, 0.04), (1.19, 0.04)),
        "CL1": ((-1.50, None), (-1.50, None), (-1.50, None)),
        "CL2": ((1.18, 0.09), (1.13, 0.08), (0.97, 0.06)),
        "TC": ((0.10, 0.07), (0.08, 0.06), (-0.12, 0.05)),
        "LB": ((0.00, 0.01), (0.00, 0.01), (0.00, 0.02)),
        "CLB": ((0.00, 0.00), (0.00, 0.00), (0.00, 0.00)),
    },
}

REFERENCE = {
    (k, nu, d, method): values[i]
    for (k, nu), rows in _ROWS.items()
    for method, values in rows.items()
    for i, d in enumerate(DELTAS)
}
