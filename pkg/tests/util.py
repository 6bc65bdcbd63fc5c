"""Shared test helpers: chi-square machinery for empirical distribution checks."""
import math


def chi2_quantile(df: int, q: float = 0.999) -> float:
    """Wilson-Hilferty approximation; accurate enough for acceptance thresholds."""
    z = {0.99: 2.3263478740408408, 0.999: 3.090232306167813}[q]
    return df * (1 - 2 / (9 * df) + z * math.sqrt(2 / (9 * df))) ** 3


def chi2_stat(observed: dict, expected: dict, total: int) -> float:
    """Pearson statistic of observed counts against expected probabilities."""
    stat = 0.0
    for key, p in expected.items():
        e = p * total
        o = observed.get(key, 0)
        if e > 0:
            stat += (o - e) ** 2 / e
    return stat
