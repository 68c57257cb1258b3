# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch simulation kernel for the scheduling policies.

Same contract and arithmetic as the numpy fallback; one tight C loop per
replication, run without the GIL so replication chunks parallelize across
threads.  Log(1+x) utility system only.
"""

from libc.math cimport sqrt


def run_batch(int policy_code, double r_const, double eta,
              const unsigned char[:, ::1] states, double q,
              const long long[::1] horizons, double z_lo, double z_hi,
              double[:, ::1] out_x1, double[:, ::1] out_x2, double[:, ::1] out_th):
    """Fill per-replication (xbar1, xbar2, theta_sq) at each horizon checkpoint."""
    cdef Py_ssize_t R = states.shape[0]
    cdef Py_ssize_t T = states.shape[1]
    cdef Py_ssize_t nh = horizons.shape[0]
    cdef Py_ssize_t i, t, h
    cdef double sum1, sum2, ths, z, zc, th, d, x1, x2, qc, xb1, xb2, g1, g2, eta_t, tt
    cdef long long cnt
    cdef unsigned char s

    with nogil:
        for i in range(R):
            sum1 = 0.0
            sum2 = 0.0
            ths = 0.0
            cnt = 0
            xb1 = 0.5
            xb2 = 0.5
            h = 0
            for t in range(T):
                if policy_code == 0:
                    z = r_const
                elif policy_code == 1:
                    if t == 0:
                        qc = 0.5
                    else:
                        qc = cnt / (<double> t)
                        if qc < 1e-9:
                            qc = 1e-9
                        if qc > 1.0:
                            qc = 1.0
                    z = (qc + 1.0) / ((2.0 - qc) + sqrt((4.0 * qc * qc - qc) + 4.0))
                else:
                    g1 = 1.0 / (1.0 + xb1)
                    g2 = 1.0 / (1.0 + xb2)
                    z = g1 / (2.0 * g2)
                    if z < 0.0:
                        z = 0.0
                    if z > 1.0:
                        z = 1.0
                if t >= 1:
                    zc = z
                    if zc < z_lo:
                        zc = z_lo
                    if zc > z_hi:
                        zc = z_hi
                    th = (4.0 * zc - 1.0) / ((1.0 + 2.0 * zc) - 3.0 * (zc * zc))
                    d = th - q
                    ths += d * d
                s = states[i, t]
                if s != 0:
                    x1 = z
                    x2 = 1.0 - z * z
                else:
                    x1 = 1.0
                    x2 = 0.0
                sum1 += x1
                sum2 += x2
                if policy_code == 1:
                    cnt += s
                elif policy_code == 2:
                    if eta > 0.0:
                        eta_t = eta
                    else:
                        eta_t = 1.0 / (<double> (t + 1))
                    xb1 = (1.0 - eta_t) * xb1 + eta_t * x1
                    xb2 = (1.0 - eta_t) * xb2 + eta_t * x2
                if h < nh and (<long long> (t + 1)) == horizons[h]:
                    tt = <double> (t + 1)
                    out_x1[h, i] = sum1 / tt
                    out_x2[h, i] = sum2 / tt
                    out_th[h, i] = ths
                    h += 1
