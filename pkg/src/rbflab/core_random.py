"""Complex Gaussian sampling and Haar-distributed orthonormal beam generation.

Every Monte Carlo draw in the package bottoms out here.  Randomness is
counter-based: an :class:`RngStream` is an immutable (seed, stream id) token,
and child streams are derived by hashing integer tags, so trials can run in
any order (or concurrently) and still reproduce bit-identically.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = ["RngStream", "sample_cscg_matrix", "sample_orthonormal_beams"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Immutable token naming one reproducible random stream.

    The same (seed, stream_id) always produces the same draws.  Derive
    per-trial or per-purpose sub-streams with :meth:`child` instead of
    sharing one generator across tasks.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = [self.seed & _MASK64, self.stream_id & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *tags: int) -> "RngStream":
        """Derive a sub-stream from integer tags (trial index, cell, purpose).

        Tags are hashed together with this stream's id, so distinct tag
        tuples give statistically independent streams and the derivation
        does not depend on interpreter hash randomization.
        """
        h = hashlib.blake2b(digest_size=8)
        h.update((self.stream_id & _MASK64).to_bytes(8, "little"))
        for t in tags:
            h.update(int(t).to_bytes(8, "little", signed=True))
        return RngStream(self.seed, int.from_bytes(h.digest(), "little"))


def _as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def sample_cscg_matrix(
    rng: RngStream | np.random.Generator, rows: int, cols: int
) -> np.ndarray:
    r"""Draw an i.i.d. circularly symmetric complex Gaussian matrix.

    Entries are CN(0, 1): real and imaginary parts independent N(0, 1/2),
    so E[|entry|^2] = 1.

    Parameters
    ----------
    rng : RngStream or numpy Generator
        Source of randomness; a stream token is opened fresh, a generator
        is advanced in place.
    rows, cols : int
        Matrix shape, both >= 1.

    Returns
    -------
    ndarray [rows, cols], complex128
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {rows}x{cols}")
    g = _as_generator(rng)
    re = g.standard_normal((rows, cols))
    im = g.standard_normal((rows, cols))
    return (re + 1j * im) / np.sqrt(2.0)


def _cscg(g: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Internal unchecked CN(0,1) tensor draw of arbitrary shape."""
    return (g.standard_normal(shape) + 1j * g.standard_normal(shape)) / np.sqrt(2.0)


def sample_orthonormal_beams(
    rng: RngStream | np.random.Generator, dim: int, num_beams: int
) -> np.ndarray:
    r"""Draw Haar-distributed orthonormal beam vectors.

    QR decomposition of a CSCG matrix, with each column of Q rephased by
    the unit phase of the matching diagonal entry of R.  The phase fix
    removes the sign/phase ambiguity of QR and makes the column frame
    exactly Haar (isotropically) distributed.

    Parameters
    ----------
    rng : RngStream or numpy Generator
    dim : int
        Ambient dimension of each beam vector.
    num_beams : int
        Number of beams, 1 <= num_beams <= dim.

    Returns
    -------
    ndarray [dim, num_beams], complex128
        Columns are unit-norm and mutually orthogonal; column m is beam m.
    """
    if num_beams < 1:
        raise ValueError(f"need at least one beam, got {num_beams}")
    if num_beams > dim:
        raise ValueError(f"cannot fit {num_beams} orthonormal beams in dimension {dim}")
    g = _as_generator(rng)
    z = _cscg(g, (dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return q[:, :num_beams]


def _batch_haar(g: np.random.Generator, batch: int, dim: int) -> np.ndarray:
    """Batch of Haar unitaries, shape [batch, dim, dim] (internal fast path)."""
    z = _cscg(g, (batch, dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, np.newaxis, :]
