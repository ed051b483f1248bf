"""NumPy versions of the fixed-step kernels, used when the extension is absent.

For a linear autonomous system one RK4 step is multiplication by the
degree-4 Taylor polynomial of h*M, so the stages are folded into a single
propagator computed once.
"""
import numpy as np


def _rk4_propagator(hm):
    d = hm.shape[-1]
    eye = np.broadcast_to(np.eye(d, dtype=complex), hm.shape)
    hm2 = hm @ hm
    hm3 = hm2 @ hm
    return eye + hm + hm2 / 2 + hm3 / 6 + hm3 @ hm / 24


def rk4_linear(m, y0, h, n_steps, stride):
    """Classic RK4 for y' = m y; returns every ``stride``-th state."""
    prop = _rk4_propagator(h * np.asarray(m, dtype=complex))
    y = np.array(y0, dtype=complex)
    out = np.empty((n_steps // stride + 1, y.size), dtype=complex)
    out[0] = y
    row = 0
    for step in range(1, n_steps + 1):
        y = prop @ y
        if step % stride == 0:
            row += 1
            out[row] = y
    return out


def jc_rk4(delta, g0, amp0, h, n_steps, stride):
    """RK4 for the rotating-frame Jaynes-Cummings amplitudes (ground, excited) x Fock.

    The Hamiltonian couples |1, n> with |0, n+1> only, so the RK4 propagator
    is a stack of 2x2 blocks.
    """
    amp0 = np.asarray(amp0, dtype=complex)
    nf = amp0.shape[1]
    c = g0 * np.sqrt(np.arange(1, nf, dtype=float))
    # block n acts on (b_n, a_{n+1})
    blocks = np.zeros((nf - 1, 2, 2), dtype=complex)
    blocks[:, 0, 0] = 0.5 * delta
    blocks[:, 1, 1] = -0.5 * delta
    blocks[:, 0, 1] = c
    blocks[:, 1, 0] = c
    prop = _rk4_propagator(-1j * h * blocks)
    # a_0 and b_{nf-1} are uncoupled
    lone_a = _rk4_propagator(np.array([[-1j * h * (-0.5 * delta)]]))[0, 0]
    lone_b = _rk4_propagator(np.array([[-1j * h * (0.5 * delta)]]))[0, 0]

    a = amp0[0].copy()
    b = amp0[1].copy()
    out = np.empty((n_steps // stride + 1, 2, nf), dtype=complex)
    out[0, 0], out[0, 1] = a, b
    row = 0
    for step in range(1, n_steps + 1):
        pair = np.stack([b[:-1], a[1:]], axis=-1)
        new = np.einsum("nij,nj->ni", prop, pair)
        a0, btop = lone_a * a[0], lone_b * b[-1]
        b[:-1], a[1:] = new[:, 0], new[:, 1]
        a[0], b[-1] = a0, btop
        if step % stride == 0:
            row += 1
            out[row, 0], out[row, 1] = a, b
    return out
