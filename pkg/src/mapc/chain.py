"""Doppler-first receive chain for slow-time coded MIMO data.

Order of operations: doppler DFT per block position, per-bin doppler phase
compensation, Hadamard decoding, virtual-array angle DFT, then coherent
integration over selected doppler-angle cells to one fast-time snapshot
per transmitter.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import windows as sigwin

from . import kernels
from .radar_model import PhaseCodeMatrix, RadarConfig, derive_params, hadamard
from .stretch import WindowSpec, window_taps
from .synth import DataCube, ShapeError, block_pulses

log = logging.getLogger(__name__)


class ProcessingError(ValueError):
    pass


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class PulseDoppler:
    """Pulse-doppler matrices ``data[position k, q, doppler bin b, receiver n]``.

    Bins are in FFT order; ``doppler_axis[b]`` is the block-rate doppler
    ``N_T * fd`` in cycles per block, wrapped to [-0.5, 0.5).
    """

    data: np.ndarray = field(repr=False)
    doppler_axis: np.ndarray = field(repr=False)
    num_tx: int
    compensated: bool = False

    @property
    def n_doppler(self) -> int:
        return self.data.shape[2]

    @property
    def chirp_doppler(self) -> np.ndarray:
        """Per-bin doppler in cycles per chirp (``fd`` of the signal model)."""
        return self.doppler_axis / self.num_tx

    @property
    def max_unambiguous_doppler(self) -> float:
        """In cycles per chirp; a single-transmitter PRI would give 0.5."""
        return 0.5 / self.num_tx


@dataclass(frozen=True)
class DecodedSet:
    """Per-transmitter pulse-doppler data ``[tx i, q, b, n]``."""

    data: np.ndarray = field(repr=False)
    doppler_axis: np.ndarray = field(repr=False)

    @property
    def num_tx(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class AngleCube:
    """Per-transmitter angle spectra ``data[tx i, q, b, a]``.

    Transmitter i's receivers occupy virtual elements ``i*N_R + n``; summing
    over i gives the full virtual-array DFT.  ``angle_axis[a]`` is the
    spatial frequency in cycles per virtual element (``u / 2`` for
    half-wavelength spacing).
    """

    data: np.ndarray = field(repr=False)
    doppler_axis: np.ndarray = field(repr=False)
    angle_axis: np.ndarray = field(repr=False)

    @property
    def total(self) -> np.ndarray:
        return self.data.sum(axis=0)

    @property
    def n_angle(self) -> int:
        return self.data.shape[3]

    def cell_power(self) -> np.ndarray:
        """Fast-time energy per doppler-angle cell of the full virtual array."""
        return np.sum(np.abs(self.total) ** 2, axis=0)


@dataclass(frozen=True)
class Snapshot:
    """Coherently integrated fast-time samples, one row per transmitter."""

    values: np.ndarray = field(repr=False)
    cells: tuple = ()
    noise_gain: np.ndarray | None = None

    def __getitem__(self, i):
        return self.values[i]

    @property
    def num_tx(self) -> int:
        return self.values.shape[0]


# --------------------------------------------------------------------------
# doppler


def _taps(window, n) -> np.ndarray:
    if window is None:
        return np.ones(n)
    if isinstance(window, WindowSpec):
        if window.length not in (0, n):
            raise ProcessingError(f"window length {window.length} != {n}")
        return window_taps(window.kind, n)
    if isinstance(window, str):
        return window_taps(window, n)
    taps = np.asarray(window, dtype=float)
    if taps.shape != (n,):
        raise ProcessingError(f"window length {taps.shape} != {n}")
    return taps


def doppler_process(blocks, window="rectangular", normalize=False) -> PulseDoppler:
    """Windowed DFT across blocks for every position, sample and receiver.

    ``blocks`` is ``[k, q, p, n]`` as returned by :func:`block_pulses`.  The
    DFT is unnormalized unless ``normalize`` applies the 1/N_p factor.
    """
    blocks = np.asarray(blocks)
    n_blocks = blocks.shape[2]
    if n_blocks < 2:
        raise ProcessingError("doppler processing needs at least 2 blocks")
    h = _taps(window, n_blocks)
    out = np.fft.fft(blocks * h[None, None, :, None], axis=2)
    if normalize:
        out /= n_blocks
    return PulseDoppler(out, np.fft.fftfreq(n_blocks), blocks.shape[0])


def detect_doppler_bins(pd: PulseDoppler, guard: int = 1, train: int = 4, scale: float = 10.0):
    """Cell-averaging threshold along doppler for every fast-time row.

    Power is summed over block positions and receivers.  Returns sorted
    ``(row, bin)`` pairs.
    """
    if train < 1 or guard < 0:
        raise ProcessingError("need train >= 1 and guard >= 0")
    n_dop = pd.n_doppler
    if 2 * (guard + train) >= n_dop:
        raise ProcessingError(
            f"guard={guard}, train={train} do not fit in {n_dop} doppler bins"
        )
    power = np.sum(np.abs(pd.data) ** 2, axis=(0, 3))  # (q, b)
    hits = []
    for row in range(power.shape[0]):
        if not power[row].any():
            continue
        mask = kernels.ca_cfar(power[row], guard, train, scale, circular=True)
        hits.extend((row, int(b)) for b in np.flatnonzero(mask))
    return hits


def doppler_compensate(pd: PulseDoppler, bins=None) -> PulseDoppler:
    """Multiply block position k by ``exp(-j 2 pi k fd_b)`` per doppler bin.

    ``bins=None`` compensates every bin using the doppler implied by its
    index; otherwise only the listed bins are touched.
    """
    n_pos = pd.data.shape[0]
    fd = pd.chirp_doppler
    sel = np.arange(pd.n_doppler) if bins is None else np.unique(np.asarray(bins, dtype=int))
    if sel.size and (sel.min() < 0 or sel.max() >= pd.n_doppler):
        raise IndexError("doppler bin out of range")
    k = np.arange(n_pos)[:, None]
    phase = np.ones((n_pos, pd.n_doppler), dtype=np.complex128)
    phase[:, sel] = np.exp(-2j * np.pi * k * fd[None, sel])
    data = pd.data * phase[:, None, :, None]
    return PulseDoppler(data, pd.doppler_axis, pd.num_tx, compensated=True)


def decode(pd: PulseDoppler, code: PhaseCodeMatrix | None = None) -> DecodedSet:
    """Separate transmitters: ``S_i = (1/N_T) sum_k conj(A[k, i]) S_k``."""
    n_pos = pd.data.shape[0]
    if code is None:
        code = hadamard(n_pos)
    if code.order != n_pos:
        raise DecodeError(
            f"code order {code.order} does not match {n_pos} block positions"
        )
    a = code.entries.astype(np.complex128)
    data = np.tensordot(a.conj().T, pd.data, axes=(1, 0)) / n_pos
    return DecodedSet(data, pd.doppler_axis)


def decode_blocks(blocks, code: PhaseCodeMatrix | None = None) -> np.ndarray:
    """Decoding applied directly to slow-time blocks (no doppler processing)."""
    blocks = np.asarray(blocks)
    n_pos = blocks.shape[0]
    if code is None:
        code = hadamard(n_pos)
    if code.order != n_pos:
        raise DecodeError(f"code order {code.order} != {n_pos} block positions")
    a = code.entries.astype(np.complex128)
    return np.tensordot(a.conj().T, blocks, axes=(1, 0)) / n_pos


# --------------------------------------------------------------------------
# angle


def angle_process(decoded: DecodedSet, n_angle: int = 64) -> AngleCube:
    """Zero-padded DFT across the transmitter-major virtual array."""
    n_tx = decoded.num_tx
    n_rx = decoded.data.shape[3]
    n_virt = n_tx * n_rx
    if n_angle < n_virt:
        raise ShapeError(f"n_angle={n_angle} < {n_virt} virtual channels")
    n_fast, n_dop = decoded.data.shape[1:3]
    out = np.empty((n_tx, n_fast, n_dop, n_angle), dtype=np.complex128)
    for i in range(n_tx):
        virt = np.zeros((n_fast, n_dop, n_angle), dtype=np.complex128)
        virt[:, :, i * n_rx:(i + 1) * n_rx] = decoded.data[i]
        out[i] = np.fft.fft(virt, axis=2)
    return AngleCube(out, decoded.doppler_axis, np.fft.fftfreq(n_angle))


# --------------------------------------------------------------------------
# cell selection and integration


@dataclass(frozen=True)
class CellSelector:
    """Which doppler-angle cells feed coherent integration.

    mode:
      ``"detect"``   peak cell of every range detection (default)
      ``"peak3db"``  cells within ``threshold_db`` of the strongest cell
      ``"topk"``     the ``k`` strongest cells
      ``"explicit"`` the given ``cells`` list of (doppler bin, angle bin)
    """

    mode: str = "detect"
    threshold_db: float = 3.0
    k: int = 1
    cells: tuple = ()
    # detection settings, range axis
    guard: int = 4
    train: int = 16
    scale_db: float = 5.0  # threshold on the max-over-cells profile, which fluctuates little
    sidelobe_db: float = 150.0
    fft_pad: int = 2
    max_cells: int = 16


def _detect_cells(cube: AngleCube, sel: CellSelector):
    total = cube.total  # (q, b, a)
    n_fast = total.shape[0]
    taps = sigwin.chebwin(n_fast, at=sel.sidelobe_db)
    n_fft = sel.fft_pad * n_fast
    rc = np.fft.fft(total * taps[:, None, None], n=n_fft, axis=0)
    p = np.abs(rc) ** 2
    flat = p.reshape(n_fft, -1)
    best = np.argmax(flat, axis=1)
    m = flat[np.arange(n_fft), best]
    if not m.any():
        return []
    mask = kernels.ca_cfar(m, sel.guard, sel.train, 10 ** (sel.scale_db / 10), circular=True)
    peak = (m >= np.roll(m, 1)) & (m >= np.roll(m, -1))
    hits = np.flatnonzero(mask & peak)
    hits = hits[np.argsort(m[hits])[::-1]]
    n_ang = total.shape[2]
    cells = []
    for r in hits:
        c = divmod(int(best[r]), n_ang)
        if c not in cells:
            cells.append(c)
    return cells[: sel.max_cells]


def select_cells(cube: AngleCube, selector: CellSelector | None = None):
    """(doppler bin, angle bin) pairs chosen by ``selector``."""
    sel = selector or CellSelector()
    power = cube.cell_power()
    n_ang = power.shape[1]
    if sel.mode == "explicit":
        cells = [tuple(int(v) for v in c) for c in sel.cells]
    elif sel.mode == "topk":
        order = np.argsort(power, axis=None)[::-1][: sel.k]
        cells = [divmod(int(i), n_ang) for i in order if power.flat[i] > 0]
    elif sel.mode == "peak3db":
        peak = power.max()
        if peak > 0:
            idx = np.flatnonzero(power >= peak * 10 ** (-sel.threshold_db / 10))
            idx = idx[np.argsort(power.flat[idx])[::-1]]
            cells = [divmod(int(i), n_ang) for i in idx]
        else:
            cells = []
    elif sel.mode == "detect":
        cells = _detect_cells(cube, sel)
    else:
        raise ValueError(f"unknown selector mode {sel.mode!r}")
    if not cells:
        log.warning("empty cell selection; falling back to the peak cell")
        cells = [divmod(int(np.argmax(power)), n_ang)]
    return cells


def coherent_integrate(cube: AngleCube, selector=None) -> Snapshot:
    """``s_i(q) = sum over selected cells of cube_i(q, b, a)``.

    ``selector`` is a :class:`CellSelector`, a list of cells, or None for
    the default detection-based selection.
    """
    if selector is None or isinstance(selector, CellSelector):
        cells = select_cells(cube, selector)
    else:
        cells = [tuple(int(v) for v in c) for c in selector]
        if not cells:
            log.warning("empty cell selection; falling back to the peak cell")
            cells = select_cells(cube, CellSelector("topk", k=1))
    b = np.array([c[0] for c in cells])
    a = np.array([c[1] for c in cells])
    values = cube.data[:, :, b, a].sum(axis=2)
    return Snapshot(values, tuple(cells))


# --------------------------------------------------------------------------
# full chain


@dataclass(frozen=True)
class PipelineOptions:
    doppler_window: str = "hanning"
    n_angle: int = 64
    selector: CellSelector = field(default_factory=CellSelector)
    compensate: bool = True
    normalize_doppler: bool = False
    keep_intermediates: bool = False


@dataclass
class PipelineResult:
    snapshot: Snapshot
    pulse_doppler: PulseDoppler | None = None
    decoded: DecodedSet | None = None
    angle: AngleCube | None = None


def _chain(samples, num_tx, code, opts: PipelineOptions, cells=None):
    blocks = block_pulses(samples, num_tx)
    pd = doppler_process(blocks, opts.doppler_window, opts.normalize_doppler)
    if opts.compensate:
        pd = doppler_compensate(pd)
    dec = decode(pd, code)
    ang = angle_process(dec, opts.n_angle)
    snap = coherent_integrate(ang, opts.selector if cells is None else cells)
    return pd, dec, ang, snap


def snapshot_noise_gain(config: RadarConfig, cells, opts: PipelineOptions | None = None,
                        code: PhaseCodeMatrix | None = None) -> np.ndarray:
    """Per-transmitter white-noise power gain from cube sample to snapshot sample.

    The chain is linear and acts identically on every fast-time sample, so
    pushing one unit impulse per (chirp, receiver) through it (stacked along
    the fast-time axis) yields the exact weights.
    """
    opts = opts or PipelineOptions()
    d = derive_params(config)
    n_in = d.n_chirps_total * config.num_rx
    basis = np.zeros((n_in, d.n_chirps_total, config.num_rx), dtype=np.complex128)
    r = np.arange(n_in)
    basis[r, r // config.num_rx, r % config.num_rx] = 1.0
    *_, snap = _chain(basis, config.num_tx, code, opts, cells=list(cells))
    return np.sum(np.abs(snap.values) ** 2, axis=1)


def run_pipeline(cube: DataCube, config: RadarConfig | None = None,
                 options: PipelineOptions | None = None) -> PipelineResult:
    """doppler_process -> doppler_compensate -> decode -> angle_process -> integrate."""
    config = config or cube.config
    opts = options or PipelineOptions()
    code = cube.code if cube.code is not None else hadamard(config.num_tx)
    if cube.n_rx != config.num_rx:
        raise ShapeError(f"cube has {cube.n_rx} receivers, config {config.num_rx}")
    pd, dec, ang, snap = _chain(cube.samples, config.num_tx, code, opts)
    gain = snapshot_noise_gain(config, snap.cells, opts, code)
    snap = Snapshot(snap.values, snap.cells, gain)
    if opts.keep_intermediates:
        return PipelineResult(snap, pd, dec, ang)
    return PipelineResult(snap)
