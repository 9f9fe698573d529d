"""Geometry, profile and seeded channel draws of one N_T x N_R experiment."""
from dataclasses import dataclass
from functools import cached_property

from link.channel import ChannelRealization, PowerDelayProfile, link_budget, sample_channel, triangular_pdp
from utils.numerics import SeededRng


@dataclass(frozen=True)
class Scenario:
    """
    Everything needed to regenerate a channel realization in isolation.

    Realization r is always drawn from stream (seed, "channel", N_T, N_R, r),
    so semi-analytic averaging and Monte Carlo counting see the same
    channels for the same r.
    """

    N: int = 256
    L_s: int = 64
    N_T: int = 10
    N_R: int = 30
    sigma_s2: float = 1.0
    seed: int = 0
    normalize_pdp: bool = False

    @cached_property
    def pdp(self) -> PowerDelayProfile:
        pdp = triangular_pdp()
        return pdp.normalized() if self.normalize_pdp else pdp

    def budget(self, ebn0_db: float):
        return link_budget(self.sigma_s2, self.N, self.L_s, self.pdp, ebn0_db)

    def channel_rng(self, realization: int) -> SeededRng:
        return SeededRng(self.seed).child("channel", self.N_T, self.N_R, realization)

    def channel(self, realization: int) -> ChannelRealization:
        return sample_channel(self.pdp, self.N, self.N_T, self.N_R, self.channel_rng(realization))

