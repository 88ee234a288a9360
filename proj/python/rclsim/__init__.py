"""Python bindings for the remapped cache layout simulator."""

try:
    from ._rclsim import *  # noqa: F401,F403  (installed wheel)
    from ._rclsim import __version__
except ImportError:  # build tree: the extension sits next to the package
    from _rclsim import *  # noqa: F401,F403
    from _rclsim import __version__
