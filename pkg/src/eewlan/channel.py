"""Deployment geometry, pathloss gains, thermal noise and SINR."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import tomli
import tomli_w

from .errors import DomainError

Point = tuple[float, float, float]


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class RadioConfig:
    """Radio parameters shared by every device.

    Defaults follow the evaluation table (5.21 GHz, 80 MHz, -174 dBm/Hz,
    7 dB amplifier noise, 40 mW cap, -96 dBm sensing threshold). The circuit
    power has no published value; 1000 mW is an assumed default.
    """

    carrier_freq_ghz: float = 5.21
    channel_width_hz: float = 80e6
    noise_psd_dbm_hz: float = -174.0
    amplifier_noise_db: float = 7.0
    max_power_mw: float = 40.0
    circuit_power_mw: float = 1000.0
    sense_threshold_dbm: float = -96.0
    ap_height_m: float = 3.0
    client_height_m: float = 1.0

    def __post_init__(self) -> None:
        for name in ("carrier_freq_ghz", "channel_width_hz", "max_power_mw",
                     "circuit_power_mw", "ap_height_m", "client_height_m"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        for name in ("noise_psd_dbm_hz", "amplifier_noise_db", "sense_threshold_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def sense_threshold_mw(self) -> float:
        return dbm_to_mw(self.sense_threshold_dbm)


@dataclass(frozen=True)
class Deployment:
    """APs, clients, and one downlink per client.

    ``links[i] = (ap_index, client_index)``; link ``i`` names its transmitter
    and receiver alike.
    """

    area_size: float
    ap_positions: tuple[Point, ...]
    client_positions: tuple[Point, ...]
    links: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ap_positions", tuple(tuple(map(float, p)) for p in self.ap_positions))
        object.__setattr__(self, "client_positions", tuple(tuple(map(float, p)) for p in self.client_positions))
        object.__setattr__(self, "links", tuple((int(a), int(c)) for a, c in self.links))
        if self.area_size <= 0:
            raise DomainError("area_size must be positive")
        for pos in self.ap_positions + self.client_positions:
            if len(pos) != 3:
                raise DomainError(f"position {pos} is not (x, y, z)")
            x, y, z = pos
            if not (0.0 <= x <= self.area_size and 0.0 <= y <= self.area_size):
                raise DomainError(f"position {pos} outside the {self.area_size} m square")
            if z <= 0:
                raise DomainError(f"position {pos} has non-positive height")
        clients = sorted(c for _, c in self.links)
        if clients != list(range(len(self.client_positions))):
            raise DomainError("every client must appear in exactly one link")
        for ap, _ in self.links:
            if not 0 <= ap < len(self.ap_positions):
                raise DomainError(f"link references unknown AP {ap}")

    @property
    def n_links(self) -> int:
        return len(self.links)

    def tx_positions(self) -> np.ndarray:
        return np.array([self.ap_positions[ap] for ap, _ in self.links], dtype=float).reshape(-1, 3)

    def rx_positions(self) -> np.ndarray:
        return np.array([self.client_positions[c] for _, c in self.links], dtype=float).reshape(-1, 3)

    def link_aps(self) -> np.ndarray:
        return np.array([ap for ap, _ in self.links], dtype=int)

    def to_toml(self) -> str:
        def pt(p: Point) -> dict:
            return {"x": round(p[0], 6), "y": round(p[1], 6), "z": round(p[2], 6)}

        doc = {
            "area": {"size": round(float(self.area_size), 6)},
            "aps": [pt(p) for p in self.ap_positions],
            "clients": [pt(p) for p in self.client_positions],
            "links": [{"ap": a, "client": c} for a, c in self.links],
        }
        return tomli_w.dumps(doc)

    @classmethod
    def from_toml(cls, text: str) -> Deployment:
        doc = tomli.loads(text)
        try:
            return cls(
                area_size=float(doc["area"]["size"]),
                ap_positions=tuple((p["x"], p["y"], p["z"]) for p in doc.get("aps", [])),
                client_positions=tuple((p["x"], p["y"], p["z"]) for p in doc.get("clients", [])),
                links=tuple((lk["ap"], lk["client"]) for lk in doc.get("links", [])),
            )
        except KeyError as exc:
            raise DomainError(f"deployment file missing key {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_toml())

    @classmethod
    def load(cls, path: str | Path) -> Deployment:
        return cls.from_toml(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class GainMatrices:
    """Linear gains: ``a[i, j]`` tx j -> rx i, ``b[i, j]`` tx j -> tx i, noise in mW."""

    a: np.ndarray
    b: np.ndarray
    noise: np.ndarray
    tx_ap: np.ndarray = field(default=None)  # AP index of each link's transmitter

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        noise = np.array(self.noise, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n) or b.shape != (n, n) or noise.shape != (n,):
            raise DomainError("gain matrices must be N x N with N noise entries")
        for m in (a, b, noise):
            if not np.all(np.isfinite(m)) or np.any(m < 0):
                raise DomainError("gains and noise must be finite and non-negative")
        if np.any(a > 1) or np.any(b > 1):
            raise DomainError("gains must not exceed 1")
        if np.any(np.diag(a) <= 0):
            raise DomainError("every receiver must hear its own transmitter (a_ii > 0)")
        if np.any(np.diag(b) != 0):
            raise DomainError("b_ii must be 0")
        tx_ap = np.arange(n) if self.tx_ap is None else np.array(self.tx_ap, dtype=int)
        for arr in (a, b, noise, tx_ap):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "noise", noise)
        object.__setattr__(self, "tx_ap", tx_ap)

    @property
    def n(self) -> int:
        return self.a.shape[0]


def pathloss_db(distance: float, carrier_freq_ghz: float) -> float:
    """Indoor pathloss in dB: free space up to 10 m, exponent 3.5 beyond."""
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance}")
    loss = 40.05 + 20.0 * math.log10(carrier_freq_ghz / 2.4) + 20.0 * math.log10(min(distance, 10.0))
    if distance > 10.0:
        loss += 35.0 * math.log10(0.1 * distance)
    return loss


def noise_power_mw(config: RadioConfig) -> float:
    dbm = config.noise_psd_dbm_hz + 10.0 * math.log10(config.channel_width_hz) + config.amplifier_noise_db
    return dbm_to_mw(dbm)


def _gain_matrix(dst: np.ndarray, src: np.ndarray, freq: float) -> np.ndarray:
    dist = np.linalg.norm(dst[:, None, :] - src[None, :, :], axis=-1)
    out = np.empty_like(dist)
    for idx, d in np.ndenumerate(dist):
        out[idx] = 10.0 ** (-pathloss_db(d, freq) / 10.0)
    return np.minimum(out, 1.0)


def build_gains(deployment: Deployment, config: RadioConfig) -> GainMatrices:
    tx = deployment.tx_positions()
    rx = deployment.rx_positions()
    a = _gain_matrix(rx, tx, config.carrier_freq_ghz)
    tx_ap = deployment.link_aps()
    # Links sharing an AP radio are at distance 0 from each other; their
    # mutual sensing is meaningless and exclusion is enforced separately.
    same_ap = tx_ap[:, None] == tx_ap[None, :]
    b = np.zeros((len(tx), len(tx)))
    if len(tx):
        dist = np.linalg.norm(tx[:, None, :] - tx[None, :, :], axis=-1)
        for (i, j), d in np.ndenumerate(dist):
            if not same_ap[i, j]:
                b[i, j] = 10.0 ** (-pathloss_db(d, config.carrier_freq_ghz) / 10.0)
        b = np.minimum(b, 1.0)
    noise = np.full(len(tx), noise_power_mw(config))
    return GainMatrices(a=a, b=b, noise=noise, tx_ap=tx_ap)


def sinr(p: Sequence[float], gains: GainMatrices, link: int) -> float:
    p = np.asarray(p, dtype=float)
    if p[link] == 0:
        return 0.0
    row = gains.a[link]
    interference = float(row @ p - row[link] * p[link])
    return float(row[link] * p[link] / (gains.noise[link] + interference))


def sinr_vector(p: Sequence[float], gains: GainMatrices) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    signal = np.diag(gains.a) * p
    interference = gains.a @ p - signal
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(p > 0, signal / (gains.noise + interference), 0.0)
    return out
