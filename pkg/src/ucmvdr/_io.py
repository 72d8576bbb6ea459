import contextlib


@contextlib.contextmanager
def open_text(target):
    """Yield a writable text stream for a path or pass an open stream through."""
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline="") as fh:
            yield fh
