"""Atomic read-modify-write primitives usable inside numba kernels.

numba has no public atomics on the CPU target, so these lower directly to
LLVM ``atomicrmw`` / ``cmpxchg`` on an array element.
"""
from numba import types
from numba.core import cgutils
from numba.extending import intrinsic


def _element_pointer(context, builder, aryty, ary, idxty, idx):
    arr = context.make_array(aryty)(context, builder, ary)
    idx = context.cast(builder, idx, idxty, types.intp)
    return cgutils.get_item_pointer(context, builder, aryty, arr, [idx])


def _rmw(op):
    def impl(typingctx, ary, idx, val):
        if not isinstance(ary, types.Array) or not isinstance(ary.dtype, types.Integer):
            return None
        sig = ary.dtype(ary, idx, val)

        def codegen(context, builder, signature, args):
            aryty, idxty, valty = signature.args
            ptr = _element_pointer(context, builder, aryty, args[0], idxty, args[1])
            v = context.cast(builder, args[2], valty, aryty.dtype)
            return builder.atomic_rmw(op, ptr, v, "seq_cst")

        return sig, codegen

    return impl


# each returns the value held *before* the update
atomic_fetch_sub = intrinsic(_rmw("sub"))
atomic_fetch_add = intrinsic(_rmw("add"))
atomic_xchg = intrinsic(_rmw("xchg"))


@intrinsic
def atomic_cas(typingctx, ary, idx, expected, desired):
    """Compare-and-swap ``ary[idx]``; returns the previous value."""
    if not isinstance(ary, types.Array) or not isinstance(ary.dtype, types.Integer):
        return None
    sig = ary.dtype(ary, idx, expected, desired)

    def codegen(context, builder, signature, args):
        aryty, idxty, expty, desty = signature.args
        ptr = _element_pointer(context, builder, aryty, args[0], idxty, args[1])
        exp = context.cast(builder, args[2], expty, aryty.dtype)
        des = context.cast(builder, args[3], desty, aryty.dtype)
        res = builder.cmpxchg(ptr, exp, des, "seq_cst", "seq_cst")
        return builder.extract_value(res, 0)

    return sig, codegen
