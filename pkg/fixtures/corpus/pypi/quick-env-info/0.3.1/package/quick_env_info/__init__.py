import platform


def env_summary():
    """Coarse machine facts for bug reports."""
    return {
        "machine": platform.machine(),
        "python": platform.python_version(),
        "system": platform.system(),
    }
