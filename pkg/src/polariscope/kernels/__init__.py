"""Training kernel selection: compiled extension if available, NumPy otherwise.

Set POLARISCOPE_PURE_PYTHON=1 to force the fallback (used by the kernel
benchmark and by tests that compare the two paths).
"""
import os

if os.environ.get("POLARISCOPE_PURE_PYTHON") == "1":
    from . import _pure as _impl
else:
    try:
        from . import _sgns as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _impl

COMPILED: bool = _impl.COMPILED
IMPLEMENTATION: str = "compiled" if COMPILED else "pure"

make_tables = _impl.make_tables
train_document_sg = _impl.train_document_sg
train_document_dm = _impl.train_document_dm
train_document_dbow = _impl.train_document_dbow


def load_impl(name: str):
    """Return a specific kernel module by name ("compiled" or "pure")."""
    if name == "pure":
        from . import _pure

        return _pure
    from . import _sgns  # type: ignore[attr-defined]

    return _sgns
