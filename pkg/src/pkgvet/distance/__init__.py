"""Edit distance with an optional compiled kernel.

The compiled extension is preferred when the build produced one; the
pure-Python fallback is always available and gives identical results.
BACKEND names whichever implementation is live so callers (and the
benchmark) can report it.
"""

try:
    from pkgvet.distance._speedups import edit_distance

    BACKEND = "speedups"
except ImportError:  # extension not built; pure Python is fine
    from pkgvet.distance._fallback import edit_distance

    BACKEND = "fallback"

__all__ = ["edit_distance", "BACKEND"]
