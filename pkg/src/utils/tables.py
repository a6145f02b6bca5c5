"""Plot-ready columnar tables of traces and spectra"""

import numpy as np
import pandas as pd

TRACE_COLUMNS = ['n', 't_prime', 'label', 'A', 'A_bar', 'zeta', 'degenerate']
SPECTRUM_COLUMNS = ['q', 'Z', 'tau', 'D', 'C']


def _blank(value):
    return np.nan if value is None else value


def trace_frame(results):
    """
    zeta trace as a table

    Parameters:
    -----------
    results : list of WindowResult
        Engine output

    Returns:
    --------
    frame : pd.DataFrame
        Columns n, t_prime, label, A, A_bar, zeta, degenerate; undefined
        values are blank
    """
    rows = [
        {
            'n': r.n,
            't_prime': r.t_prime,
            'label': r.label,
            'A': _blank(r.area),
            'A_bar': _blank(r.running_mean),
            'zeta': _blank(r.zeta),
            'degenerate': int(r.degenerate),
        }
        for r in results
    ]
    return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def spectrum_frame(spectrum):
    """One row per grid point: q, Z, tau, D, C (C blank at the grid ends)"""
    c = np.full(spectrum.grid.count, np.nan)
    c[1:-1] = spectrum.c
    d = np.where(np.isfinite(spectrum.dq_dim), spectrum.dq_dim, np.nan)
    return pd.DataFrame({
        'q': spectrum.q,
        'Z': spectrum.z,
        'tau': spectrum.tau,
        'D': d,
        'C': c,
    }, columns=SPECTRUM_COLUMNS)


def accumulated_frame(results):
    """
    Accumulated C(q) curves, one column per window

    Windows without an attached spectrum are left out; columns are named
    ``n<ordinal>``.
    """
    columns = {}
    q = None
    for r in results:
        if r.spectrum is None:
            continue
        q = r.spectrum.q_interior
        columns[f'n{r.n}'] = r.spectrum.c
    if q is None:
        return pd.DataFrame({'q': []})
    frame = pd.DataFrame(columns)
    frame.insert(0, 'q', q)
    return frame


def noise_frame(results, noise_results):
    """Side-by-side zeta of the input and of its moment-matched noise"""
    input_frame = trace_frame(results)[['n', 't_prime', 'zeta']]
    noise = trace_frame(noise_results)[['n', 'zeta']].rename(columns={'zeta': 'zeta_noise'})
    return input_frame.merge(noise, on='n', how='outer').sort_values('n').reset_index(drop=True)
