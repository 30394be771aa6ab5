"""Approximation-aware RV32I(E)M instruction-set simulator."""

try:
    from ._axrv32 import *  # noqa: F401,F403
    from ._axrv32 import __doc__  # noqa: F401
except ImportError:  # plain-CMake builds put the module on sys.path directly
    from _axrv32 import *  # noqa: F401,F403
    from _axrv32 import __doc__  # noqa: F401
