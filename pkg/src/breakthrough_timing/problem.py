"""Bundle of the model, payoffs and threshold law that define one instance."""

from __future__ import annotations

from dataclasses import dataclass

from .diffusion import DiffusionModel, GbmParams, gbm_model
from .law import CostLaw, ThresholdLaw, threshold_law_from_costs
from .payoffs import TechnologyPayoffs


@dataclass(frozen=True)
class Problem:
    model: DiffusionModel
    payoffs: TechnologyPayoffs
    law: ThresholdLaw

    @property
    def x_R(self) -> float:
        return self.payoffs.x_R

    @classmethod
    def gbm_linear(cls, mu=0.0, sigma=0.1**0.5, r=0.05, investment_cost=1.0, kappa=2.0,
                   costs: CostLaw | None = None, bargaining="nash") -> "Problem":
        """GBM state with ``R = x - I``, ``U = kappa x - I``; exponential(1) costs by default."""
        model = gbm_model(GbmParams(mu, sigma, r))
        payoffs = TechnologyPayoffs.linear(model, investment_cost, kappa, bargaining)
        costs = CostLaw.exponential(1.0) if costs is None else costs
        return cls(model, payoffs, threshold_law_from_costs(costs, payoffs))

    def with_costs(self, costs: CostLaw) -> "Problem":
        return Problem(self.model, self.payoffs, threshold_law_from_costs(costs, self.payoffs))
