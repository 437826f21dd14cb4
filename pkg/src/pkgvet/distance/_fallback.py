"""Pure-Python edit distance kernel.

Unrestricted Damerau-Levenshtein: insert, delete, substitute, and
transpose two adjacent characters, where transposed characters may be
edited again afterwards. Unlike the restricted variant this is a true
metric, so triangle-inequality pruning over a registry-sized name list
is sound.
"""

from __future__ import annotations


def edit_distance(a: str, b: str) -> int:
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    inf = la + lb
    # index i+1/j+1 addresses prefix lengths i/j; row 0 is the inf border
    d = [[0] * (lb + 2) for _ in range(la + 2)]
    d[0][0] = inf
    for i in range(la + 1):
        d[i + 1][0] = inf
        d[i + 1][1] = i
    for j in range(lb + 1):
        d[0][j + 1] = inf
        d[1][j + 1] = j
    last_row = {}  # char -> last row where it occurred in a
    for i in range(1, la + 1):
        ch_a = a[i - 1]
        last_col = 0  # last column in this row where chars matched
        for j in range(1, lb + 1):
            ch_b = b[j - 1]
            k = last_row.get(ch_b, 0)
            l = last_col
            if ch_a == ch_b:
                cost = 0
                last_col = j
            else:
                cost = 1
            d[i + 1][j + 1] = min(
                d[i][j] + cost,
                d[i + 1][j] + 1,
                d[i][j + 1] + 1,
                d[k][l] + (i - k - 1) + 1 + (j - l - 1),
            )
        last_row[ch_a] = i
    return d[la + 1][lb + 1]
