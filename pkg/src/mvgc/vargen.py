"""Variational generator for the consensus graph.

The edge prior is a Bernoulli field whose parameters come from belief-weighted
agreement between the observed graphs.  The posterior puts a logit on every
node pair via an attention-style product of global-feature embeddings, and is
sampled through the binary-concrete relaxation so gradients reach the
posterior net.  The ELBO combines per-view adjacency reconstruction, the
entropy of the relaxed sample, and a closed-form upper bound on the KL term.
"""

from dataclasses import dataclass

import numpy as np

from .nncore import (
    MLPSpec,
    Parameter,
    Tensor,
    bernoulli_entropy,
    binary_cross_entropy,
    init_params,
    mlp_apply,
)


@dataclass(frozen=True)
class PriorBeta:
    """Edge-prior probabilities, clamped into [epsilon, 1]."""

    beta: np.ndarray
    epsilon: float


@dataclass(frozen=True)
class PosteriorLogits:
    """Pairwise edge logits alpha = K Q^T with the embeddings that built them."""

    alpha: Tensor
    k_embed: Tensor
    q_embed: Tensor


@dataclass(frozen=True)
class ConsensusSample:
    """Relaxed edge weights, strictly inside (0, 1)."""

    s: Tensor
    tau: float


class PosteriorNet:
    """Posterior over the consensus graph: an MLP on global features plus the
    square mixing matrix that produces the query embedding."""

    def __init__(self, spec, params, w):
        self.spec = spec
        self.params = params
        self.w = w

    @classmethod
    def create(cls, d_in, hidden, dropout=0.1, seed=0):
        spec = MLPSpec(
            layer_dims=(d_in, hidden, hidden),
            activations=("relu", "none"),
            dropout_rate=dropout,
            init_scheme="xavier",
        )
        mlp_seed, w_seed = np.random.SeedSequence(seed).spawn(2)
        params = init_params(spec, mlp_seed)
        bound = np.sqrt(6.0 / (hidden + hidden))
        w = Parameter(
            np.random.default_rng(w_seed).uniform(-bound, bound, (hidden, hidden))
        )
        return cls(spec, params, w)

    def parameters(self):
        return [*self.params, self.w]


def compute_prior_beta(graphs, beliefs, eps=1e-6):
    """Belief-weighted edge prior over all node pairs.

    Each view votes b^v for the states it observed and 1-b^v against; the
    normalized vote can exceed 1 when beliefs are small and edges absent, so
    the result is clamped into [eps, 1] to stay a valid Bernoulli parameter.
    """
    if not graphs:
        raise ValueError("need at least one graph")
    if len(beliefs) != len(graphs):
        raise ValueError(f"{len(graphs)} graphs but {len(beliefs)} beliefs")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise ValueError("graphs disagree on node count")
    b = np.asarray(beliefs, dtype=np.float64)
    if (b <= 0).any() or (b > 1).any():
        raise ValueError("beliefs must lie in (0, 1]")
    total = b.sum()
    if total == 0.0:
        raise ValueError("all beliefs are zero")
    votes = np.zeros((n, n))
    for g, bv in zip(graphs, b):
        votes += bv * g.adj + (1.0 - bv) * (1.0 - g.adj)
    return PriorBeta(beta=np.clip(votes / total, eps, 1.0), epsilon=eps)


def infer_posterior(x_global, net, training=False, rng=None):
    """K = f'(global features), Q = K W, alpha = K Q^T."""
    k = mlp_apply(net.params, net.spec, x_global, training=training, rng=rng)
    q = k @ net.w
    alpha = k @ q.T
    return PosteriorLogits(alpha=alpha, k_embed=k, q_embed=q)


def sample_consensus(logits, tau, rng=None, mode="train", noise=None):
    """Draw relaxed edge weights from the binary-concrete posterior.

    Train mode perturbs the logits with logistic noise log(U) - log(1-U),
    U ~ Uniform(0,1); eval mode fixes U = 0.5 (the distribution median) so the
    sample is deterministic.  ``noise`` overrides the draw for replaying a
    fixed perturbation.  Outputs are nudged off exact 0/1 so downstream logs
    stay finite.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    alpha = logits.alpha
    if mode == "train":
        if noise is None:
            if rng is None:
                raise ValueError("train-mode sampling needs an rng or a noise matrix")
            u = np.clip(rng.random(alpha.value.shape), 1e-12, 1.0 - 1e-12)
            noise = np.log(u) - np.log1p(-u)
        s = ((alpha + noise) / tau).sigmoid()
    elif mode == "eval":
        s = (alpha / tau).sigmoid()
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ConsensusSample(s=s.clip(1e-12, 1.0 - 1e-12), tau=float(tau))


def normalize_consensus(sample):
    """Row-normalize the relaxed sample so it can drive message passing."""
    s = sample.s
    return s / s.sum(axis=1, keepdims=True)


def kl_upper_bound(prior):
    """Sum of log(1/beta) over all pairs: the closed-form bound on the KL
    divergence from posterior to prior."""
    return float(-np.log(prior.beta).sum())


def consensus_entropy(sample):
    """Summed Bernoulli entropy of the relaxed weights."""
    return bernoulli_entropy(sample.s)


def decode_adjacency(z):
    """Reconstruct an adjacency as sigmoid(Z Z^T); symmetric by construction."""
    return (z @ z.T).sigmoid()


def elbo_loss(graphs, decoded, sample, prior):
    """Evidence lower bound: reconstruction likelihood of every observed
    graph, plus sample entropy, minus the KL bound.  Training maximizes this,
    so it enters the total objective with a negative weight."""
    if len(decoded) != len(graphs):
        raise ValueError(f"{len(graphs)} graphs but {len(decoded)} decodings")
    likelihood = 0.0
    for g, a_hat in zip(graphs, decoded):
        likelihood = likelihood - binary_cross_entropy(g.adj, a_hat)
    return likelihood + consensus_entropy(sample) - kl_upper_bound(prior)


def view_prior_cross_entropy(graph, beliefs, view):
    """Cross-entropy between one view's adjacency and its slice of the edge
    prior.

    Edges present in the view contribute log(sum_b / b^v) and absent ones
    log(sum_b / (b^v - 1 + sum_b)); the total strictly decreases as the
    view's belief grows, which is how belief encodes task relevance.
    """
    b = np.asarray(beliefs, dtype=np.float64)
    if (b <= 0).any() or (b > 1).any():
        raise ValueError("beliefs must lie in (0, 1]")
    total = b.sum()
    bv = b[view]
    if bv - 1.0 + total <= 0.0:
        raise ValueError(
            "prior slice degenerates: belief mass outside the view is too small"
        )
    n_sq = graph.n ** 2
    edges = graph.adj.sum()
    return float(
        n_sq * np.log(total)
        - edges * np.log(bv)
        - (n_sq - edges) * np.log(bv - 1.0 + total)
    )
