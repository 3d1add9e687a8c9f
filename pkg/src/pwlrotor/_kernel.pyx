# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled orbit kernel; arithmetic mirrors _kernel_py exactly."""

from libc.math cimport floor

IMPLEMENTATION = "cython"


def iterate(const double[::1] breaks, const double[::1] values,
            const double[::1] slopes, double x0, long m):
    """Apply the circle map m times from x0 in [0, 1); see _kernel_py."""
    cdef Py_ssize_t n = breaks.shape[0]
    cdef double b0 = breaks[0]
    cdef double bw = breaks[n - 1] - 1.0
    cdef double pw = values[n - 1] - 1.0
    cdef double sw = slopes[n - 1]
    cdef double x = x0
    cdef double y, fy
    cdef long wind = 0
    cdef long i
    cdef Py_ssize_t k
    for i in range(m):
        if x < b0:
            y = pw + sw * (x - bw)
        else:
            k = n - 1
            while breaks[k] > x:
                k -= 1
            y = values[k] + slopes[k] * (x - breaks[k])
        fy = floor(y)
        x = y - fy
        if x >= 1.0:
            x -= 1.0
            fy += 1.0
        wind += <long> fy
    return wind, x
