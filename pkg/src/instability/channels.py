"""Destruction channels as block-structured faithful conditional expectations.

A destruction channel is an idempotent quantum channel with a full-rank
fixed state.  Every such channel is determined by a unitary change of basis
together with a list of blocks ``(d_A, d_B, tau)``: in the block basis the
Hilbert space splits as a direct sum of factors ``A_i (x) B_i`` and the
channel acts as

    Delta(rho) = (+)_i  tau_i (x) tr_{A_i}[ Pi_i rho Pi_i ]

with each ``tau_i`` a full-rank state on ``A_i``.  Representing channels by
this data (instead of Kraus or Choi matrices) makes idempotence and
faithfulness true by construction; Kraus/Choi exports are provided for
interoperability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ValidationError
from .linalg import (
    as_matrix,
    check_density,
    herm,
    mat_pow,
    rank_tol,
    spectral_norm,
)
from .sampling import random_unitary, rng_from

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Block:
    """One direct summand A (x) B with a full-rank state tau on the A factor."""

    d_a: int
    d_b: int
    tau: np.ndarray

    def __post_init__(self):
        if self.d_a < 1 or self.d_b < 1:
            raise ValidationError("block dimensions must be positive")
        tau = check_density(self.tau, self.d_a)
        w = np.linalg.eigvalsh(tau)
        if w[0] <= rank_tol(self.d_a, w[-1]):
            raise ValidationError("block state tau must be full rank (faithfulness)")
        object.__setattr__(self, "tau", tau)

    @property
    def dim(self) -> int:
        return self.d_a * self.d_b


def _check_basis(basis, dim: int) -> np.ndarray:
    u = as_matrix(basis, dim)
    if spectral_norm(u @ u.conj().T - np.eye(dim)) > UNITARY_TOL:
        raise ValidationError("basis matrix is not unitary within tolerance")
    return u


@dataclass(frozen=True)
class DestructionChannel:
    """Faithful idempotent channel in block form.

    ``basis`` maps the computational basis to the block basis: its columns
    are the block-basis vectors, so an operator X is processed as
    ``U @ block_action(U^dag X U) @ U^dag``.
    """

    dim: int
    basis: np.ndarray
    blocks: tuple[Block, ...]
    _slices: tuple[slice, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValidationError("a channel needs at least one block")
        total = sum(b.dim for b in blocks)
        if total != self.dim:
            raise ValidationError(
                f"blocks cover dimension {total}, channel dimension is {self.dim}"
            )
        object.__setattr__(self, "basis", _check_basis(self.basis, self.dim))
        object.__setattr__(self, "blocks", blocks)
        offs, slices = 0, []
        for b in blocks:
            slices.append(slice(offs, offs + b.dim))
            offs += b.dim
        object.__setattr__(self, "_slices", tuple(slices))

    # -- frame changes -------------------------------------------------

    def to_block_frame(self, x: np.ndarray) -> np.ndarray:
        return self.basis.conj().T @ as_matrix(x, self.dim) @ self.basis

    def from_block_frame(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ x @ self.basis.conj().T

    # -- channel action ------------------------------------------------

    def _block_reduce(self, xb: np.ndarray, i: int) -> np.ndarray:
        """tr_A of block i of an operator already in the block frame."""
        b = self.blocks[i]
        m = xb[self._slices[i], self._slices[i]].reshape(b.d_a, b.d_b, b.d_a, b.d_b)
        return np.einsum("abad->bd", m)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Schroedinger action Delta(X)."""
        xb = self.to_block_frame(x)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            out[self._slices[i], self._slices[i]] = np.kron(
                b.tau, self._block_reduce(xb, i)
            )
        return self.from_block_frame(out)

    def apply_dual(self, y: np.ndarray) -> np.ndarray:
        """Heisenberg dual Delta^*(Y); a unital conditional expectation."""
        yb = self.to_block_frame(y)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            m = yb[self._slices[i], self._slices[i]].reshape(
                b.d_a, b.d_b, b.d_a, b.d_b
            )
            w = np.einsum("ae,ebad->bd", b.tau, m)
            out[self._slices[i], self._slices[i]] = np.kron(np.eye(b.d_a), w)
        return self.from_block_frame(out)

    def apply_tp_expectation(self, x: np.ndarray) -> np.ndarray:
        """The trace-preserving conditional expectation onto the same algebra."""
        xb = self.to_block_frame(x)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            out[self._slices[i], self._slices[i]] = np.kron(
                np.eye(b.d_a) / b.d_a, self._block_reduce(xb, i)
            )
        return self.from_block_frame(out)

    # -- fixed data ------------------------------------------------------

    def fixed_input_power(self, r: float) -> np.ndarray:
        """Delta(I)^r, computed blockwise: Delta(I) = (+) d_A tau_i (x) I."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            out[self._slices[i], self._slices[i]] = np.kron(
                mat_pow(b.d_a * b.tau, r), np.eye(b.d_b)
            )
        return self.from_block_frame(out)

    def fixed_input(self) -> np.ndarray:
        return self.fixed_input_power(1.0)

    def fixed_state(self) -> np.ndarray:
        """The canonical full-rank fixed state Delta(I)/dim."""
        return self.fixed_input() / self.dim

    def twist(self, x: np.ndarray, r: float) -> np.ndarray:
        """Delta(I)^{r/2} X Delta(I)^{r/2}."""
        t = self.fixed_input_power(r / 2.0)
        return t @ as_matrix(x, self.dim) @ t

    @property
    def is_unital(self) -> bool:
        return bool(
            spectral_norm(self.fixed_input() - np.eye(self.dim)) <= 1e-10
        )

    # -- fixed-point algebra ----------------------------------------------

    def algebra_dim(self) -> int:
        """Real dimension of the fixed-point algebra im Delta^*."""
        return sum(b.d_b**2 for b in self.blocks)

    def algebra_basis(self) -> list[np.ndarray]:
        """Orthonormal Hermitian basis of im Delta^* = (+) C I_A (x) L(B_i)."""
        out = []
        for i, b in enumerate(self.blocks):
            for h in hermitian_basis(b.d_b):
                e = np.zeros((self.dim, self.dim), dtype=complex)
                e[self._slices[i], self._slices[i]] = np.kron(
                    np.eye(b.d_a) / np.sqrt(b.d_a), h
                )
                out.append(self.from_block_frame(e))
        return out

    def embed_algebra_element(self, parts: list[np.ndarray]) -> np.ndarray:
        """Assemble (+)_i I_{A_i} (x) parts[i] in the original frame."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i, b in enumerate(self.blocks):
            out[self._slices[i], self._slices[i]] = np.kron(
                np.eye(b.d_a), as_matrix(parts[i], b.d_b)
            )
        return self.from_block_frame(out)

    def dual_block_reduction(self, y: np.ndarray, i: int) -> np.ndarray:
        """The B_i component of Delta^*(Y): tr_A[(tau_i (x) I) Y_i]."""
        yb = self.to_block_frame(y)
        b = self.blocks[i]
        m = yb[self._slices[i], self._slices[i]].reshape(b.d_a, b.d_b, b.d_a, b.d_b)
        return np.einsum("ae,ebad->bd", b.tau, m)

    # -- exports -----------------------------------------------------------

    def choi(self, dual: bool = False) -> np.ndarray:
        """Choi matrix sum_{jk} |j><k| (x) C(|j><k|) of Delta (or Delta^*)."""
        act = self.apply_dual if dual else self.apply
        d = self.dim
        c = np.zeros((d * d, d * d), dtype=complex)
        for j in range(d):
            for k in range(d):
                e = np.zeros((d, d), dtype=complex)
                e[j, k] = 1.0
                c[j * d : (j + 1) * d, k * d : (k + 1) * d] = act(e)
        return c

    def kraus(self, tol: float = 1e-12) -> list[np.ndarray]:
        """Kraus operators recovered from the Choi matrix."""
        c = herm(self.choi())
        w, v = np.linalg.eigh(c)
        d = self.dim
        ops = []
        for lam, vec in zip(w, v.T):
            if lam > tol * max(w[-1], 1e-300):
                # Choi block (j, k) is C(|j><k|): the eigenvector component
                # at index j*d + a is the (a, j) entry of the Kraus operator.
                ops.append(np.sqrt(lam) * vec.reshape(d, d).T)
        return ops


@dataclass(frozen=True)
class InstabilitySystem:
    """A dimension paired with its destruction channel."""

    dim: int
    channel: DestructionChannel

    def __post_init__(self):
        if self.channel.dim != self.dim:
            raise ValidationError("channel dimension does not match system")


def system(channel: DestructionChannel) -> InstabilitySystem:
    return InstabilitySystem(channel.dim, channel)


# ---------------------------------------------------------------------------
# Hermitian bases
# ---------------------------------------------------------------------------


def hermitian_basis(dim: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of L(C^dim) (generalized Gell-Mann layout)."""
    out = []
    for k in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[k, k] = 1.0
        out.append(e)
    inv = 1.0 / np.sqrt(2.0)
    for j in range(dim):
        for k in range(j + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[j, k] = inv
            e[k, j] = inv
            out.append(e)
            f = np.zeros((dim, dim), dtype=complex)
            f[j, k] = -1j * inv
            f[k, j] = 1j * inv
            out.append(f)
    return out


# ---------------------------------------------------------------------------
# Standard channels
# ---------------------------------------------------------------------------


def dephaser(dim: int, basis=None) -> DestructionChannel:
    """Pinching onto a distinguished orthonormal basis (coherence)."""
    u = np.eye(dim, dtype=complex) if basis is None else _check_basis(basis, dim)
    one = np.array([[1.0]], dtype=complex)
    return DestructionChannel(dim, u, tuple(Block(1, 1, one) for _ in range(dim)))


def replacer(gamma) -> DestructionChannel:
    """rho -> tr[rho] gamma for a full-rank target state (athermality)."""
    g = check_density(gamma)
    d = g.shape[0]
    return DestructionChannel(d, np.eye(d, dtype=complex), (Block(d, 1, g),))


def depolarizer(dim: int) -> DestructionChannel:
    """rho -> tr[rho] I/dim (nonuniformity)."""
    return replacer(np.eye(dim) / dim)


def cond_depolarizer(d_a: int, d_b: int) -> DestructionChannel:
    """rho -> u^A (x) rho^B (conditional nonuniformity)."""
    d = d_a * d_b
    return DestructionChannel(
        d, np.eye(d, dtype=complex), (Block(d_a, d_b, np.eye(d_a) / d_a),)
    )


def cond_replacer(gamma_a, d_b: int) -> DestructionChannel:
    """rho -> gamma^A (x) rho^B (conditional athermality)."""
    g = check_density(gamma_a)
    d = g.shape[0] * d_b
    return DestructionChannel(d, np.eye(d, dtype=complex), (Block(g.shape[0], d_b, g),))


def tpce(shape, basis=None) -> DestructionChannel:
    """Trace-preserving conditional expectation with block shape [(d_A, d_B), ...]."""
    blocks = tuple(Block(da, db, np.eye(da) / da) for da, db in shape)
    dim = sum(b.dim for b in blocks)
    u = np.eye(dim, dtype=complex) if basis is None else basis
    return DestructionChannel(dim, u, blocks)


def standard_channel(kind: str, **params) -> DestructionChannel:
    """Dispatch the named constructions above (used by the JSON loaders)."""
    kinds = {
        "dephaser": lambda: dephaser(int(params["dim"]), params.get("basis")),
        "replacer": lambda: replacer(params["gamma"]),
        "depolarizer": lambda: depolarizer(int(params["dim"])),
        "cond_depolarizer": lambda: cond_depolarizer(
            int(params["d_a"]), int(params["d_b"])
        ),
        "cond_replacer": lambda: cond_replacer(params["gamma"], int(params["d_b"])),
        "tpce": lambda: tpce(params["shape"], params.get("basis")),
    }
    if kind not in kinds:
        raise ValidationError(f"unknown channel kind {kind!r}")
    try:
        return kinds[kind]()
    except KeyError as exc:
        raise ValidationError(f"channel kind {kind!r} missing parameter {exc}") from exc


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


def tensor_channels(a: DestructionChannel, b: DestructionChannel) -> DestructionChannel:
    """Delta^{AB} = Delta^A (x) Delta^B with the pairwise tensor block structure.

    The raw tensor of the two block bases interleaves factors as
    ``A_i (x) B_i (x) A_j (x) B_j``; a permutation regroups each pair into
    ``(A_i A_j) (x) (B_i B_j)`` and makes the composite blocks contiguous.
    """
    dim = a.dim * b.dim
    pairs = list(product(range(len(a.blocks)), range(len(b.blocks))))
    perm = np.zeros(dim, dtype=int)
    blocks = []
    new_off = 0
    offs_a = [s.start for s in a._slices]
    offs_b = [s.start for s in b._slices]
    for i, j in pairs:
        ba, bb = a.blocks[i], b.blocks[j]
        blocks.append(Block(ba.d_a * bb.d_a, ba.d_b * bb.d_b, np.kron(ba.tau, bb.tau)))
        for xa in range(ba.d_a):
            for ya in range(ba.d_b):
                for xb in range(bb.d_a):
                    for yb in range(bb.d_b):
                        old = (offs_a[i] + xa * ba.d_b + ya) * b.dim + (
                            offs_b[j] + xb * bb.d_b + yb
                        )
                        new = (
                            new_off
                            + (xa * bb.d_a + xb) * (ba.d_b * bb.d_b)
                            + (ya * bb.d_b + yb)
                        )
                        perm[new] = old
        new_off += ba.dim * bb.dim
    u_raw = np.kron(a.basis, b.basis)
    # Column `new` of the composite basis is column perm[new] of the raw tensor.
    u = u_raw[:, perm]
    return DestructionChannel(dim, u, tuple(blocks))


def tensor_compose(a: InstabilitySystem, b: InstabilitySystem) -> InstabilitySystem:
    return system(tensor_channels(a.channel, b.channel))


# ---------------------------------------------------------------------------
# Free states
# ---------------------------------------------------------------------------


def free_state(channel: DestructionChannel, weights, betas) -> np.ndarray:
    """Assemble (+) p_i tau_i (x) beta_i in the original frame."""
    p = np.asarray(weights, dtype=float)
    if p.shape != (len(channel.blocks),):
        raise ValidationError("one weight per block required")
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValidationError("weights must lie on the probability simplex")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    out = np.zeros((channel.dim, channel.dim), dtype=complex)
    for i, b in enumerate(channel.blocks):
        beta = check_density(betas[i], b.d_b)
        out[channel._slices[i], channel._slices[i]] = p[i] * np.kron(b.tau, beta)
    return channel.from_block_frame(out)


def free_parameter_count(channel: DestructionChannel) -> int:
    """Scalar parameters of the free-state family."""
    return (len(channel.blocks) - 1) + sum(b.d_b**2 - 1 for b in channel.blocks)


def _simplex_grid(k: int, resolution: int) -> list[np.ndarray]:
    if k == 1:
        return [np.array([1.0])]
    steps = max(resolution - 1, 1)

    def rec(parts_left, remaining):
        if parts_left == 1:
            yield [remaining]
            return
        for s in range(remaining + 1):
            for rest in rec(parts_left - 1, remaining - s):
                yield [s] + rest

    return [np.array(c, dtype=float) / steps for c in rec(k, steps)]


def _qubit_state_grid(resolution: int) -> list[np.ndarray]:
    """Bloch-ball grid including the center and the pure-state boundary."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    out = [eye / 2]
    n_r = max(2, resolution // 4)
    n_th = max(3, resolution // 2)
    n_ph = max(4, resolution // 2)
    for r in np.linspace(0.0, 1.0, n_r)[1:]:
        for th in np.linspace(0.0, np.pi, n_th):
            for ph in np.linspace(0.0, 2 * np.pi, n_ph, endpoint=False):
                v = r * np.array(
                    [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)]
                )
                out.append(herm((eye + v[0] * sx + v[1] * sy + v[2] * sz) / 2))
    return out


def _state_grid(dim: int, resolution: int, rng) -> list[np.ndarray]:
    if dim == 1:
        return [np.array([[1.0 + 0j]])]
    if dim == 2:
        return _qubit_state_grid(resolution)
    # Higher-dimensional B factors: eigenbasis grid plus seeded random states.
    # The family is too big for an exhaustive grid; this hybrid is a
    # documented pragmatic choice.
    from .sampling import random_density

    r = rng_from(rng)
    out = [np.eye(dim, dtype=complex) / dim]
    for k in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[k, k] = 1.0
        out.append(e)
    for _ in range(max(resolution**2, 16)):
        out.append(random_density(dim, r))
    return out


def enumerate_free_grid(
    channel: DestructionChannel, resolution: int = 21, seed=0
) -> list[np.ndarray]:
    """Grid covering the free-state family.

    Weights run over a simplex grid; each B factor runs over a Bloch-type
    grid for qubits (exact coverage up to resolution) and a grid/random
    hybrid for larger factors.
    """
    r = rng_from(seed)
    per_block = [_state_grid(b.d_b, resolution, r) for b in channel.blocks]
    out = []
    for p in _simplex_grid(len(channel.blocks), resolution):
        for combo in product(*per_block):
            out.append(free_state(channel, p, list(combo)))
    return out


def random_free_state(channel: DestructionChannel, rng) -> np.ndarray:
    from .sampling import random_density

    r = rng_from(rng)
    k = len(channel.blocks)
    p = r.dirichlet(np.ones(k)) if k > 1 else np.array([1.0])
    betas = [random_density(b.d_b, r) for b in channel.blocks]
    return free_state(channel, p, betas)


def random_free_unitary(channel: DestructionChannel, seed) -> np.ndarray:
    """Unitary commuting with the channel: U = (+) u_i (x) v_i, [u_i, tau_i] = 0."""
    r = rng_from(seed)
    out = np.zeros((channel.dim, channel.dim), dtype=complex)
    for i, b in enumerate(channel.blocks):
        w, v = np.linalg.eigh(b.tau)
        u = np.zeros((b.d_a, b.d_a), dtype=complex)
        # Haar unitary on each (nearly) degenerate eigenspace of tau keeps
        # u tau u^dag = tau exactly within tolerance.
        start = 0
        for k in range(1, b.d_a + 1):
            if k == b.d_a or w[k] - w[start] > 1e-9 * max(w[-1], 1e-300):
                blockdim = k - start
                u_sub = random_unitary(blockdim, r)
                vs = v[:, start:k]
                u += vs @ u_sub @ vs.conj().T
                start = k
        v_b = random_unitary(b.d_b, r)
        out[channel._slices[i], channel._slices[i]] = np.kron(u, v_b)
    return channel.from_block_frame(out)


# ---------------------------------------------------------------------------
# Common reference states
# ---------------------------------------------------------------------------


def basis_state(dim: int, k: int) -> np.ndarray:
    e = np.zeros((dim, dim), dtype=complex)
    e[k, k] = 1.0
    return e


def plus_state(dim: int) -> np.ndarray:
    """The fully coherent state |+><+| with |+> = sum_x |x>/sqrt(dim)."""
    v = np.ones(dim, dtype=complex) / np.sqrt(dim)
    return np.outer(v, v.conj())


def maximally_entangled_state(d: int) -> np.ndarray:
    """|Phi><Phi| with |Phi> = sum_x |xx>/sqrt(d) on a d*d composite."""
    v = np.zeros(d * d, dtype=complex)
    for x in range(d):
        v[x * d + x] = 1.0
    v /= np.sqrt(d)
    return np.outer(v, v.conj())
