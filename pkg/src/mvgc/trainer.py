"""Full-batch training loop tying the generator, encoders, and clustering
objectives together.

Each epoch runs two forward passes.  An eval-mode pass (deterministic
consensus, no dropout) produces the embeddings that drive k-means: pseudo
labels from the fused embedding under the previous epoch's beliefs, per-view
labels for the belief update, and the centroids the soft assignments are
anchored to.  A train-mode pass then builds the differentiable objective

    total = L_r + gamma_c * L_c - gamma_E * L_E

where L_r reconstructs the per-view and global features, L_c pulls soft
assignments toward a sharpened target, and L_E is the evidence bound on the
consensus-graph posterior.  The belief update itself is never differentiated
through; beliefs enter the loss as constants refreshed once per epoch.
"""

from dataclasses import dataclass, field

import numpy as np

from .cluster import (
    Beliefs,
    clustering_loss,
    fuse,
    kmeans,
    soft_assignment,
    target_distribution,
    update_beliefs,
)
from .encoder import (
    GlobalDecoder,
    ViewEncoder,
    encode_view,
    reconstruction_loss,
    reconstruction_loss_global,
)
from .graph import add_self_loops, row_normalize
from .metrics import acc, ari, f1, nmi
from .nncore import OptimizerState, adam_step, zero_grads
from .vargen import (
    PosteriorNet,
    compute_prior_beta,
    decode_adjacency,
    elbo_loss,
    infer_posterior,
    normalize_consensus,
    sample_consensus,
)


class TrainingError(Exception):
    """Raised when an epoch produces a non-finite loss term."""


# fixed codes keep the per-(epoch, purpose) RNG streams disjoint
_PURPOSE_CODES = {"noise": 0, "dropout": 1, "pseudo": 2, "global": 3, "final": 4}
_VIEW_CODE_BASE = 16


def _purpose_code(purpose, view=None):
    if view is not None:
        return _VIEW_CODE_BASE + view
    return _PURPOSE_CODES[purpose]


def rng_stream(seed, epoch, purpose, view=None):
    """Deterministic generator for one (epoch, purpose) slot."""
    return np.random.default_rng((seed, epoch, _purpose_code(purpose, view)))


def derived_seed(seed, epoch, purpose, view=None):
    """Integer seed for components that reseed internally (k-means restarts)."""
    sequence = np.random.SeedSequence((seed, epoch, _purpose_code(purpose, view)))
    return int(sequence.generate_state(1)[0])


@dataclass
class TrainState:
    """Everything that persists across epochs: parameter groups, beliefs,
    optimizer moments, and the normalized view graphs."""

    posterior: PosteriorNet
    encoders: list
    global_decoder: GlobalDecoder
    a_norm: list
    beliefs: Beliefs
    optimizer: OptimizerState
    epoch: int = 0
    prior: object = None

    def parameters(self):
        params = list(self.posterior.parameters())
        for enc in self.encoders:
            params.extend(enc.parameters())
        params.extend(self.global_decoder.parameters())
        return params


@dataclass(frozen=True)
class EpochArtifacts:
    """Constants for one epoch's loss: the belief pair (pre-update for the
    prior, post-update for fusion), cluster structure from the eval pass, and
    the frozen concrete-noise draw."""

    prior_beliefs: Beliefs
    beliefs: Beliefs
    pseudo_labels: np.ndarray
    view_labels: tuple
    view_centroids: tuple
    global_centroids: np.ndarray
    noise: np.ndarray


@dataclass(frozen=True)
class FitResult:
    labels: np.ndarray
    metrics: object
    beliefs_history: list
    loss_history: list
    zbar: np.ndarray
    z_views: list
    consensus: np.ndarray
    inertia: float
    state: TrainState = field(repr=False, default=None)


def init_state(dataset, config):
    """Build parameter groups and optimizer for a dataset under a config."""
    seeds = np.random.SeedSequence(config.seed).generate_state(
        dataset.num_views + 2
    )
    d_global = dataset.x_global.shape[1]
    posterior = PosteriorNet.create(
        d_global, config.hidden, dropout=config.dropout, seed=int(seeds[0])
    )
    global_decoder = GlobalDecoder.create(
        config.hidden, config.hidden, d_global, seed=int(seeds[1])
    )
    encoders = [
        ViewEncoder.create(
            x.shape[1], config.hidden, config.embed_dim, seed=int(seeds[2 + v])
        )
        for v, (x, _) in enumerate(dataset.views)
    ]
    state = TrainState(
        posterior=posterior,
        encoders=encoders,
        global_decoder=global_decoder,
        a_norm=[row_normalize(add_self_loops(g)) for g in dataset.graphs],
        beliefs=Beliefs.initial(dataset.num_views, config.rho),
        optimizer=None,
    )
    state.optimizer = OptimizerState(state.parameters(), lr=config.lr)
    return state


def _forward_eval(state, dataset, config):
    """Deterministic pass: consensus probabilities and per-view embeddings as
    plain arrays."""
    logits = infer_posterior(dataset.x_global, state.posterior, training=False)
    sample = sample_consensus(logits, config.tau, mode="eval")
    s_norm = normalize_consensus(sample)
    z_views = [
        encode_view(x, a_norm, s_norm, enc, config.order, training=False).value
        for (x, _), a_norm, enc in zip(dataset.views, state.a_norm, state.encoders)
    ]
    return sample.s.value, z_views


def prepare_epoch(state, dataset, config):
    """Refresh the epoch's constants from an eval-mode pass.

    Pseudo labels cluster the fusion under the incoming beliefs; the belief
    update then rescores every view before the global centroids are drawn
    from the re-fused embedding.
    """
    seed, epoch = config.seed, state.epoch
    _, z_views = _forward_eval(state, dataset, config)
    pseudo = kmeans(
        fuse(z_views, state.beliefs), dataset.c,
        seed=derived_seed(seed, epoch, "pseudo"), restarts=config.restarts,
    )
    view_results = [
        kmeans(z, dataset.c, seed=derived_seed(seed, epoch, "view", view=v),
               restarts=config.restarts)
        for v, z in enumerate(z_views)
    ]
    beliefs = update_beliefs(
        pseudo.labels, [r.labels for r in view_results], config.rho
    )
    global_result = kmeans(
        fuse(z_views, beliefs), dataset.c,
        seed=derived_seed(seed, epoch, "global"), restarts=config.restarts,
    )
    u = np.clip(
        rng_stream(seed, epoch, "noise").random((dataset.n, dataset.n)),
        1e-12, 1.0 - 1e-12,
    )
    return EpochArtifacts(
        prior_beliefs=state.beliefs,
        beliefs=beliefs,
        pseudo_labels=pseudo.labels,
        view_labels=tuple(r.labels for r in view_results),
        view_centroids=tuple(r.centroids for r in view_results),
        global_centroids=global_result.centroids,
        noise=np.log(u) - np.log1p(-u),
    )


def build_loss(state, dataset, config, artifacts, training=True, p_global=None):
    """Differentiable objective for one epoch given frozen artifacts.

    ``p_global`` overrides the sharpened target; by default it is computed
    from the current global assignment and treated as a constant.  Returns
    (total, named terms, the target actually used) so callers can re-evaluate
    the loss with the target pinned.
    """
    prior = compute_prior_beta(dataset.graphs, artifacts.prior_beliefs.b)
    state.prior = prior
    dropout_rng = (
        rng_stream(config.seed, state.epoch, "dropout") if training else None
    )
    logits = infer_posterior(
        dataset.x_global, state.posterior, training=training, rng=dropout_rng
    )
    sample = sample_consensus(
        logits, config.tau, mode="train", noise=artifacts.noise
    )
    s_norm = normalize_consensus(sample)
    z_views = [
        encode_view(x, a_norm, s_norm, enc, config.order, training=training)
        for (x, _), a_norm, enc in zip(dataset.views, state.a_norm, state.encoders)
    ]

    l_r = reconstruction_loss_global(
        dataset.x_global, logits.q_embed, state.global_decoder
    )
    for (x, _), z, enc in zip(dataset.views, z_views, state.encoders):
        l_r = l_r + reconstruction_loss(x, z, enc)

    decoded = [decode_adjacency(z) for z in z_views]
    l_e = elbo_loss(dataset.graphs, decoded, sample, prior)

    zbar = fuse(z_views, artifacts.beliefs)
    q_views = [
        soft_assignment(z, centroids)
        for z, centroids in zip(z_views, artifacts.view_centroids)
    ]
    q_global = soft_assignment(zbar, artifacts.global_centroids)
    if p_global is None:
        p_global = target_distribution(q_global.q.value)
    l_c = clustering_loss(p_global, q_views, q_global)

    total = l_r + config.gamma_c * l_c - config.gamma_e * l_e
    parts = {"reconstruction": l_r, "clustering": l_c, "elbo": l_e,
             "total": total}
    return total, parts, p_global


def train_epoch(state, dataset, config):
    """One optimization step; returns the epoch report.

    The report carries the scalar losses, the refreshed beliefs, and the
    pseudo labels that drove the belief update.
    """
    artifacts = prepare_epoch(state, dataset, config)
    total, parts, _ = build_loss(state, dataset, config, artifacts, training=True)
    report = {}
    for name, term in parts.items():
        value = float(term.value)
        if not np.isfinite(value):
            raise TrainingError(
                f"epoch {state.epoch}: loss term {name!r} is {value}"
            )
        report[name] = value
    params = state.parameters()
    zero_grads(params)
    total.backward()
    adam_step(state.optimizer)
    state.beliefs = artifacts.beliefs
    state.epoch += 1
    report["beliefs"] = artifacts.beliefs.b
    report["pseudo_labels"] = artifacts.pseudo_labels
    return report


def fit(dataset, config, callback=None):
    """Train for ``config.epochs`` epochs and cluster the final embedding.

    Final labels come from k-means on the eval-mode fusion.  When the dataset
    carries ground truth the standard four metrics are attached.  ``callback``
    (epoch, report) fires after every epoch.
    """
    state = init_state(dataset, config)
    beliefs_history = [state.beliefs.b]
    loss_history = []
    for epoch in range(config.epochs):
        report = train_epoch(state, dataset, config)
        beliefs_history.append(report["beliefs"])
        loss_history.append(
            (report["reconstruction"], report["clustering"], report["elbo"])
        )
        if callback is not None:
            callback(epoch, report)
    consensus, z_views = _forward_eval(state, dataset, config)
    zbar = fuse(z_views, state.beliefs)
    final = kmeans(
        zbar, dataset.c,
        seed=derived_seed(config.seed, state.epoch, "final"),
        restarts=config.restarts,
    )
    metrics = None
    if dataset.labels is not None:
        truth = dataset.labels
        metrics = {
            "nmi": nmi(truth, final.labels),
            "ari": ari(truth, final.labels),
            "acc": acc(truth, final.labels),
            "f1": f1(truth, final.labels),
        }
    return FitResult(
        labels=final.labels,
        metrics=metrics,
        beliefs_history=beliefs_history,
        loss_history=loss_history,
        zbar=zbar,
        z_views=z_views,
        consensus=consensus,
        inertia=final.inertia,
        state=state,
    )
