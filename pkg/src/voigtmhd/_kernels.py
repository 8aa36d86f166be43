"""Fused loops for the Voigt-MHD right-hand side (grid products and per-mode algebra)."""
import numba
import numpy as np

# symmetric-tensor slot of (i, j)
_SLOT = np.array([[0, 3, 4], [3, 1, 5], [4, 5, 2]])


@numba.njit(cache=True)
def grid_products(phys, out):
    """out[0:6] = u_i u_j - b_i b_j over (00,11,22,01,02,12); out[6:9] = u x b."""
    n0, n1, n2 = phys.shape[1:]
    for a in range(n0):
        for b in range(n1):
            for c in range(n2):
                u0 = phys[0, a, b, c]
                u1 = phys[1, a, b, c]
                u2 = phys[2, a, b, c]
                b0 = phys[3, a, b, c]
                b1 = phys[4, a, b, c]
                b2 = phys[5, a, b, c]
                out[0, a, b, c] = u0 * u0 - b0 * b0
                out[1, a, b, c] = u1 * u1 - b1 * b1
                out[2, a, b, c] = u2 * u2 - b2 * b2
                out[3, a, b, c] = u0 * u1 - b0 * b1
                out[4, a, b, c] = u0 * u2 - b0 * b2
                out[5, a, b, c] = u1 * u2 - b1 * b2
                out[6, a, b, c] = u1 * b2 - u2 * b1
                out[7, a, b, c] = u2 * b0 - u0 * b2
                out[8, a, b, c] = u0 * b1 - u1 * b0


@numba.njit(cache=True)
def combine_modes(y, hat, kx, ky, kz, mask, inv_l, visc, slot, out):
    """Per-mode assembly of (du, dB, dPsi) from state ``y`` and product spectra ``hat``."""
    n0, n1, n2 = y.shape[1:]
    for a in range(n0):
        k0 = kx[a]
        for b in range(n1):
            k1 = ky[b]
            for c in range(n2):
                k2 = kz[c]
                il = inv_l[a, b, c]
                vs = visc[a, b, c]
                if not mask[a, b, c]:
                    for i in range(3):
                        out[i, a, b, c] = -vs * y[i, a, b, c]
                    for i in range(3, 9):
                        out[i, a, b, c] = 0.0
                    continue
                # flux divergence i k_j T_ij, then Leray projection
                f0 = 1j * (k0 * hat[slot[0, 0], a, b, c] + k1 * hat[slot[0, 1], a, b, c] + k2 * hat[slot[0, 2], a, b, c])
                f1 = 1j * (k0 * hat[slot[1, 0], a, b, c] + k1 * hat[slot[1, 1], a, b, c] + k2 * hat[slot[1, 2], a, b, c])
                f2 = 1j * (k0 * hat[slot[2, 0], a, b, c] + k1 * hat[slot[2, 1], a, b, c] + k2 * hat[slot[2, 2], a, b, c])
                kk = k0 * k0 + k1 * k1 + k2 * k2
                if kk > 0.0:
                    s = (k0 * f0 + k1 * f1 + k2 * f2) / kk
                    f0 -= k0 * s
                    f1 -= k1 * s
                    f2 -= k2 * s
                out[0, a, b, c] = -il * f0 - vs * y[0, a, b, c]
                out[1, a, b, c] = -il * f1 - vs * y[1, a, b, c]
                out[2, a, b, c] = -il * f2 - vs * y[2, a, b, c]
                e0 = hat[6, a, b, c]
                e1 = hat[7, a, b, c]
                e2 = hat[8, a, b, c]
                out[3, a, b, c] = il * 1j * (k1 * e2 - k2 * e1)
                out[4, a, b, c] = il * 1j * (k2 * e0 - k0 * e2)
                out[5, a, b, c] = il * 1j * (k0 * e1 - k1 * e0)
                out[6, a, b, c] = il * e0
                out[7, a, b, c] = il * e1
                out[8, a, b, c] = il * e2
