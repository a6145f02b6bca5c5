"""Summary statistics of zeta traces"""

import numpy as np


def zeta_values(results):
    """
    Defined zeta values of a trace, in window order

    Parameters:
    -----------
    results : list of WindowResult
        Engine output

    Returns:
    --------
    zetas : np.ndarray
    """
    return np.array([r.zeta for r in results if r.zeta is not None], dtype=float)


def summarize_zeta(zetas):
    """
    Max, mean, median and upper percentiles of a zeta sample

    Parameters:
    -----------
    zetas : array-like
        zeta values, undefined entries already removed

    Returns:
    --------
    summary : dict
        All statistics are None for an empty sample
    """
    zetas = np.asarray(zetas, dtype=float)
    if zetas.size == 0:
        return {'count': 0, 'max': None, 'mean': None, 'median': None, 'p95': None, 'p99': None}

    return {
        'count': int(zetas.size),
        'max': float(np.max(zetas)),
        'mean': float(np.mean(zetas)),
        'median': float(np.median(zetas)),
        'p95': float(np.percentile(zetas, 95)),
        'p99': float(np.percentile(zetas, 99)),
    }


def prior_median(results, n, span=50):
    """Median zeta over up to ``span`` windows before ordinal n"""
    prior = [r.zeta for r in results if r.zeta is not None and n - span <= r.n < n]
    return float(np.median(prior)) if prior else None
