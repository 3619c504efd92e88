"""glibc allocator tuning.

The training loop allocates and frees many multi-megabyte temporaries per
epoch. With the default mmap threshold each of them is a fresh mapping and
pays page faults on first touch; keeping them on the heap roughly halves the
cost of the elementwise kernels. Set GAPINN_NO_MALLOPT=1 to skip.
"""

import ctypes
import ctypes.util
import os
import sys

M_TRIM_THRESHOLD = -1
M_MMAP_THRESHOLD = -3


def tune_allocator() -> bool:
    if os.environ.get("GAPINN_NO_MALLOPT") or not sys.platform.startswith("linux"):
        return False
    try:
        libc = ctypes.CDLL(ctypes.util.find_library("c") or "libc.so.6")
        mallopt = libc.mallopt
    except (OSError, AttributeError):
        return False  # not glibc
    ok = mallopt(M_MMAP_THRESHOLD, 1 << 30) == 1
    ok &= mallopt(M_TRIM_THRESHOLD, (1 << 31) - 1) == 1
    return bool(ok)
