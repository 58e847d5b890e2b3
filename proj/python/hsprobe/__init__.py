"""Hidden-state similarity probing: C++ core exposed to Python."""

from ._hsprobe import *  # noqa: F401,F403
from ._hsprobe import __doc__, tool_version  # noqa: F401


def main(argv=None):
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))  # noqa: F405
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
