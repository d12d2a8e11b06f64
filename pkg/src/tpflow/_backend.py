"""Select the compiled kernel extension or its numpy fallback at import."""

import os

if os.environ.get("TPFLOW_PURE", "") not in ("", "0"):
    from . import _kernels_np as impl

    BACKEND = "numpy"
else:
    try:
        from . import _ext as impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_np as impl

        BACKEND = "numpy"

param_mode_kernel = impl.param_mode_kernel
conv_accumulate = impl.conv_accumulate

__all__ = ["BACKEND", "param_mode_kernel", "conv_accumulate"]
