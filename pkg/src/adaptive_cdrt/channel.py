"""Rayleigh fading draws and MRT projection gains.

Realizations are produced in blocks.  Block ``b`` of seed ``s`` comes from a
Philox generator keyed by ``s`` whose counter has ``b`` in its top word, so
every block is an independent substream that can be regenerated on its own.
Trial ``t`` is row ``t % BLOCK_SIZE`` of block ``t // BLOCK_SIZE``; this
mapping never depends on how many trials or workers a run uses.

Noise power is normalized to one; the transmit SNRs carry all scaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SystemParams

__all__ = [
    "BLOCK_SIZE",
    "DegenerateChannelError",
    "RandomStream",
    "ChannelRealization",
    "draw_channels",
    "draw_trial",
    "mrt_projection",
]

BLOCK_SIZE = 8192


class DegenerateChannelError(ArithmeticError):
    """A beamformer was built from an all-zero channel vector."""


@dataclass(frozen=True)
class RandomStream:
    """Counter-based substream ``block`` of the run seeded with ``seed``."""

    seed: int
    block: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.block < 0:
            raise ValueError("seed and block must be non-negative")
        if self.block >= 2**64:
            raise ValueError("block index exceeds the counter word")

    def generator(self) -> np.random.Generator:
        bitgen = np.random.Philox(key=self.seed, counter=[0, 0, 0, self.block])
        return np.random.Generator(bitgen)


@dataclass(frozen=True)
class ChannelRealization:
    """A batch of fading draws; leading axis indexes trials.

    ``y_sr`` is the S-R gain seen through the MRT beam aimed at U1 and
    ``y_s1`` the S-U1 gain seen through the beam aimed at R.
    """

    h_s1: np.ndarray  # (B, N) complex
    h_sr: np.ndarray  # (B, N) complex
    h_r1: np.ndarray  # (B,) complex
    h_r2: np.ndarray  # (B,) complex
    norm2_s1: np.ndarray
    norm2_sr: np.ndarray
    y_sr: np.ndarray
    y_s1: np.ndarray

    def __len__(self) -> int:
        return self.h_r1.shape[0]

    @property
    def gain_r1(self) -> np.ndarray:
        return np.abs(self.h_r1) ** 2

    @property
    def gain_r2(self) -> np.ndarray:
        return np.abs(self.h_r2) ** 2

    def subset(self, index) -> "ChannelRealization":
        return ChannelRealization(
            **{k: getattr(self, k)[index] for k in self.__dataclass_fields__}
        )


def mrt_projection(beam_source: np.ndarray, target: np.ndarray) -> np.ndarray:
    """``|target . w|^2`` with the MRT beam ``w = beam_source^H / ||beam_source||``.

    Works on single vectors or on batches along the last axis.
    """
    beam_source = np.asarray(beam_source)
    target = np.asarray(target)
    norm2 = np.sum(np.abs(beam_source) ** 2, axis=-1)
    if np.any(norm2 == 0):
        raise DegenerateChannelError("MRT beam built from a zero channel vector")
    inner = np.sum(target * np.conj(beam_source), axis=-1)
    return np.abs(inner) ** 2 / norm2


def draw_channels(
    params: SystemParams, stream: RandomStream, size: int = BLOCK_SIZE
) -> ChannelRealization:
    """The first ``size`` trials of ``stream``'s block.

    Each entry of h_pq is CN(0, d_pq^-alpha).  Unit-variance draws are laid
    out link-major, ``[r1, r2, s1_0, sr_0, s1_1, sr_1, ...]``, each a run of
    ``BLOCK_SIZE`` trials, and the whole block is always generated and
    reduced before slicing.  Hence a trial's fading, bit for bit, does not
    depend on ``size``, on distances or powers, or (for the links they share)
    on the antenna count: runs over any of these axes see common random
    numbers.
    """
    if not 0 < size <= BLOCK_SIZE:
        raise ValueError(f"size must be in [1, {BLOCK_SIZE}]")
    n = params.n_antennas
    raw = stream.generator().standard_normal((2 * n + 2, 2, BLOCK_SIZE))
    z = (raw[:, 0, :] + 1j * raw[:, 1, :]).T * np.sqrt(0.5)  # (BLOCK_SIZE, 2n + 2)

    h_r1 = z[:, 0] * np.sqrt(params.mean_gain("r1"))
    h_r2 = z[:, 1] * np.sqrt(params.mean_gain("r2"))
    h_s1 = z[:, 2::2] * np.sqrt(params.mean_gain("s1"))
    h_sr = z[:, 3::2] * np.sqrt(params.mean_gain("sr"))

    norm2_s1 = np.sum(np.abs(h_s1) ** 2, axis=1)
    norm2_sr = np.sum(np.abs(h_sr) ** 2, axis=1)
    if n == 1:
        # single direction: the beam adds nothing, keep the gains bit-exact
        y_sr, y_s1 = norm2_sr.copy(), norm2_s1.copy()
    else:
        y_sr = mrt_projection(h_s1, h_sr)
        y_s1 = mrt_projection(h_sr, h_s1)
    ch = ChannelRealization(h_s1, h_sr, h_r1, h_r2, norm2_s1, norm2_sr, y_sr, y_s1)
    # reductions run on the full block so a trial's bits never depend on size
    return ch if size == BLOCK_SIZE else ch.subset(slice(0, size))


def draw_trial(params: SystemParams, seed: int, index: int) -> ChannelRealization:
    """The realization of trial ``index`` as a batch of one."""
    if index < 0:
        raise ValueError("trial index must be non-negative")
    block, row = divmod(index, BLOCK_SIZE)
    ch = draw_channels(params, RandomStream(seed, block), size=row + 1)
    return ch.subset(slice(row, row + 1))
