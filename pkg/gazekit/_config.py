"""Global configuration state and functions for management."""
import threading
from contextlib import contextmanager

_global_config = {
    'eps': 1e-7,
    'n_jobs': None,
    'float_digits': 17,
}
_threadlocal = threading.local()


def _get_threadlocal_config():
    """Get a threadlocal **mutable** configuration. If the configuration
    does not exist, copy the default global configuration."""
    if not hasattr(_threadlocal, 'global_config'):
        _threadlocal.global_config = _global_config.copy()
    return _threadlocal.global_config


def get_config():
    """Retrieve current values for configuration set by :func:`set_config`

    Returns
    -------
    config : dict
        Keys are parameter names that can be passed to :func:`set_config`.
    """
    # Return a copy of the threadlocal configuration so that users will
    # not be able to modify the configuration with the returned dict.
    return _get_threadlocal_config().copy()


def set_config(eps=None, n_jobs=None, float_digits=None):
    """Set global gazekit configuration

    Parameters
    ----------
    eps : float, default=None
        Stability constant of the saliency metrics (KLD log guard,
        normalization guard and zero-variance threshold relative to the
        value range). Global default: 1e-7.

    n_jobs : int, default=None
        Number of joblib workers used by batch entry points. ``None`` means
        serial processing.

    float_digits : int, default=None
        Significant digits used when floats are written to JSON. Global
        default: 17.
    """
    local_config = _get_threadlocal_config()

    if eps is not None:
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps!r}")
        local_config['eps'] = float(eps)
    if n_jobs is not None:
        local_config['n_jobs'] = int(n_jobs)
    if float_digits is not None:
        local_config['float_digits'] = int(float_digits)


@contextmanager
def config_context(**new_config):
    """Context manager for global gazekit configuration

    Parameters
    ----------
    **new_config
        Any keyword accepted by :func:`set_config`.

    Examples
    --------
    >>> import gazekit
    >>> with gazekit.config_context(eps=1e-9):
    ...     gazekit.get_config()['eps']
    1e-09
    """
    old_config = get_config()
    set_config(**new_config)

    try:
        yield
    finally:
        local_config = _get_threadlocal_config()
        local_config.clear()
        local_config.update(old_config)
