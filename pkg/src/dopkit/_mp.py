"""Thin helpers around gmpy2 for fixed-precision object-array arithmetic."""

import contextlib
import math
import os

import gmpy2
import numpy as np

#: precision used to store weights and node products; bases never need more
REF_BITS = 512
DEFAULT_BITS = 128
MAX_BITS = 1024


def default_bits():
    """Default basis precision, overridable by ``DOPKIT_PRECISION_BITS``."""
    raw = os.environ.get("DOPKIT_PRECISION_BITS")
    if raw is None:
        return DEFAULT_BITS
    bits = int(raw)
    if bits < 64:
        raise ValueError("DOPKIT_PRECISION_BITS must be >= 64")
    return bits


@contextlib.contextmanager
def working_precision(bits):
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield


def mpf_array(values):
    """Object array of mpfr at the current context precision."""
    return np.array([gmpy2.mpfr(v) for v in values], dtype=object)


def to_float(values):
    return np.array([float(v) for v in values], dtype=float)


def mp_log(values):
    return np.array([gmpy2.log(v) for v in values], dtype=object)


def mp_exp(values):
    return np.array([gmpy2.exp(v) for v in values], dtype=object)


def mp_sqrt(values):
    return np.array([gmpy2.sqrt(v) for v in values], dtype=object)


def mp_fsum(values):
    """Sum of an object array; mpfr addition is already correctly rounded."""
    total = gmpy2.mpfr(0)
    for v in values:
        total += v
    return total


def lgamma(x):
    return gmpy2.lgamma(x)[0]


def sign(x):
    return (x > 0) - (x < 0)


def log_abs(x):
    """log|x| for an mpfr/mpc value; -inf at zero."""
    if x == 0:
        return -math.inf
    if isinstance(x, gmpy2.mpc):
        return gmpy2.log(abs(x))
    return gmpy2.log(abs(x))
