import numpy as np


def assert_spectrum_close(got, expected, atol=1e-9):
    """Multiset comparison of eigenvalue arrays with greedy nearest matching."""
    got = list(np.asarray(got, dtype=complex))
    expected = list(np.asarray(expected, dtype=complex))
    assert len(got) == len(expected)
    for e in expected:
        j = int(np.argmin([abs(g - e) for g in got]))
        assert abs(got[j] - e) < atol, f"no match for {e}: nearest {got[j]}"
        got.pop(j)
