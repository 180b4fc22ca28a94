# -*- coding: utf-8 -*-
#! python3

"""
    Neural imitation learners: behavior cloning, rollout-based imitation and
    predictive imitation learning (encoder + multi-step predictors + policy,
    tied to the known dynamics by a consistency term).

    Shapes inside the losses are batches of chunks. A chunk starting at t holds
    the measurements y_t..y_{t+H} and v_t..v_{t+H-1} of one trajectory.
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# standard library
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

# 3rd party library
import numpy as np

# submodules
from pil_lab.autodiff.checkpoint import load_checkpoint, save_checkpoint
from pil_lab.autodiff.mlp import Mlp, MlpSpec
from pil_lab.autodiff.optim import LR_END, LR_START, AdamState, adam_step, cosine_lr
from pil_lab.autodiff.params import ParamStore
from pil_lab.autodiff.tape import Tape
from pil_lab.numkit.linalg import check_psd
from pil_lab.numkit.noise import RngStream
from pil_lab.reporters.csv_reporter import CsvReporter
from pil_lab.utils.errors import ShapeError, TrainingDivergenceError
from pil_lab.worlds.dataset import ObservationView, TrajectoryDataset
from pil_lab.worlds.dynamics import DynamicsFn, ObsEncoder

# #############################################################################
# ########## Globals ###############
# ##################################

logger = logging.getLogger(__name__)

MODES = ("pil", "rollout", "bc")
BATCH_SIZE = 64
TRAINING_LOG_HEADERS = ["epoch", "state_err", "input_err", "consistency", "total", "lr"]

# #############################################################################
# ########## Classes ###############
# ##################################


class PilLossConfig(object):
    """Loss weights and training mode.

    :param Q: weight of the measurement prediction error, observation space (p x p)
    :param R: weight of the input error (m x m)
    :param P: weight of the consistency residual, state space (n x n)
    :param int H: prediction horizon
    :param float alpha: decay of the offset-tau terms, alpha^(tau - 1)
    :param str mode: ``pil``, ``rollout`` or ``bc``
    :param bool dynamics_gradient: let adjoints flow through the dynamics
    """

    def __init__(
        self,
        Q,
        R,
        P,
        H: int = 1,
        alpha: float = 0.9,
        mode: str = "pil",
        dynamics_gradient: bool = True,
    ):
        if mode not in MODES:
            raise ValueError("mode must be one of {}, not '{}'".format(MODES, mode))
        if int(H) < 1:
            raise ValueError("horizon H must be at least 1, got {}".format(H))
        if not 0.0 < float(alpha) <= 1.0:
            raise ValueError("decay alpha must lie in (0, 1], got {}".format(alpha))
        self.Q = check_psd(Q, "Q")
        self.R = check_psd(R, "R")
        self.P = check_psd(P, "P")
        self.H = int(H)
        self.alpha = float(alpha)
        self.mode = mode
        self.dynamics_gradient = bool(dynamics_gradient)

    def __repr__(self):
        return "PilLossConfig(mode={}, H={}, alpha={}, dynamics_gradient={})".format(
            self.mode, self.H, self.alpha, self.dynamics_gradient
        )

    @property
    def window(self) -> int:
        """Chunk horizon actually used: 1 in BC mode."""
        return 1 if self.mode == "bc" else self.H

    def decay(self, tau: int) -> float:
        return self.alpha ** (tau - 1)

    def asDict(self) -> dict:
        return {
            "Q": self.Q.tolist(),
            "R": self.R.tolist(),
            "P": self.P.tolist(),
            "H": self.H,
            "alpha": self.alpha,
            "mode": self.mode,
            "dynamics_gradient": self.dynamics_gradient,
        }


@dataclass
class LossBreakdown:
    """Weighted loss terms, averaged over the minibatch."""

    state_err: float = 0.0
    input_err: float = 0.0
    consistency: float = 0.0
    total: float = 0.0

    def asDict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Chunks:
    """Batch of training windows: y (C, H+1, p), v (C, H, m)."""

    y: np.ndarray
    v: np.ndarray

    def __len__(self):
        return self.y.shape[0]

    @property
    def H(self) -> int:
        return self.v.shape[1]

    def take(self, index) -> "Chunks":
        return Chunks(y=self.y[index], v=self.v[index])


class PilModel(object):
    """Encoder, multi-step predictors and policy sharing one ParamStore.

    Rollout and BC models carry a policy only.

    :param ParamStore store: parameters of every component
    :param Mlp policy: state -> input
    :param Mlp encoder: measurement -> latent
    :param list predictors: H heads latent -> predicted state
    """

    def __init__(self, store: ParamStore, policy: Mlp, encoder: Mlp = None, predictors: list = None):
        self.store = store
        self.policy = policy
        self.encoder = encoder
        self.predictors = list(predictors or [])
        if (self.encoder is None) != (not self.predictors):
            raise ValueError("encoder and predictors go together")
        if self.encoder is not None:
            for head in self.predictors:
                if head.spec.n_in != self.encoder.spec.n_out:
                    raise ShapeError(
                        "predictor input {} does not match latent width {}".format(
                            head.spec.n_in, self.encoder.spec.n_out
                        )
                    )
                if head.spec.n_out != policy.spec.n_in:
                    raise ShapeError(
                        "predictor output {} must be the raw state width {}".format(
                            head.spec.n_out, policy.spec.n_in
                        )
                    )

    def __repr__(self):
        return "PilModel(H={}, params={})".format(self.H, len(self.store))

    @property
    def H(self) -> int:
        return len(self.predictors)

    @classmethod
    def create(
        cls,
        obs_dim: int,
        state_dim: int,
        input_dim: int,
        H: int,
        rng: RngStream,
        with_predictors: bool = True,
        encoder_hidden: tuple = (128, 128),
        latent_dim: int = 64,
        predictor_hidden: tuple = (128,),
        policy_hidden: tuple = (64, 64),
    ) -> "PilModel":
        """Build and initialize a model.

        Components draw from separate child streams, so the policy
        initialization does not depend on H or on the presence of predictors.
        """
        enc_rng, pred_rng, pol_rng = rng.spawn(3)
        store = ParamStore()
        encoder, predictors = None, []
        if with_predictors:
            encoder = Mlp(MlpSpec.from_sizes(obs_dim, encoder_hidden, latent_dim), store, "encoder", enc_rng)
            for tau, head_rng in enumerate(pred_rng.spawn(H), start=1):
                spec = MlpSpec.from_sizes(latent_dim, predictor_hidden, state_dim)
                predictors.append(Mlp(spec, store, "predictor_{}".format(tau), head_rng))
        policy = Mlp(MlpSpec.from_sizes(state_dim, policy_hidden, input_dim), store, "policy", pol_rng)
        return cls(store, policy, encoder, predictors)

    @classmethod
    def from_specs(cls, store: ParamStore, specs: dict) -> "PilModel":
        """Rebind components to an existing store (segments named as in :meth:`create`)."""
        encoder = Mlp(specs["encoder"], store, "encoder") if "encoder" in specs else None
        predictors = []
        tau = 1
        while "predictor_{}".format(tau) in specs:
            name = "predictor_{}".format(tau)
            predictors.append(Mlp(specs[name], store, name))
            tau += 1
        return cls(store, Mlp(specs["policy"], store, "policy"), encoder, predictors)

    def specs(self) -> dict:
        out = {"policy": self.policy.spec}
        if self.encoder is not None:
            out["encoder"] = self.encoder.spec
        for head in self.predictors:
            out[head.segment] = head.spec
        return out

    def save(self, path: Path, meta: dict = None) -> Path:
        return save_checkpoint(path, self.store, self.specs(), meta)

    @classmethod
    def load(cls, path: Path) -> tuple:
        """:return: (PilModel, checkpoint metadata)"""
        store, specs, meta = load_checkpoint(path)
        return cls.from_specs(store, specs), meta


class TrainingLog(object):
    """Per-epoch mean loss terms and learning rate."""

    def __init__(self):
        self.records = []

    def __len__(self):
        return len(self.records)

    def append(self, epoch: int, breakdown: LossBreakdown, lr: float):
        record = {"epoch": epoch}
        record.update(breakdown.asDict())
        record["lr"] = lr
        self.records.append(record)

    @property
    def totals(self) -> list:
        return [r["total"] for r in self.records]

    def write_csv(self, csvpath: Path) -> Path:
        reporter = CsvReporter(csvpath=Path(csvpath), headers=TRAINING_LOG_HEADERS)
        reporter.add_multiple(list(self.records))
        return csvpath


class DeployedPolicy(object):
    """Stateless measurement feedback: u = policy(decode(y)).

    The encoder and predictors are training scaffolding and are not used here.
    """

    def __init__(self, policy: Mlp, encoder: ObsEncoder = None):
        self.policy = policy
        self.encoder = encoder or ObsEncoder("raw")

    def __repr__(self):
        return "DeployedPolicy({}, {})".format(self.policy, self.encoder)

    def __call__(self, y) -> np.ndarray:
        return self.policy.apply(self.encoder.decode(y))


# #############################################################################
# ########## Functions #############
# ##################################


def extract_chunks(data, H: int) -> Chunks:
    """All length-H windows of every trajectory, T - H + 1 per trajectory."""
    obs = data.observations() if isinstance(data, TrajectoryDataset) else data
    if not isinstance(obs, ObservationView):
        raise TypeError("expected a TrajectoryDataset or an ObservationView, not {}".format(type(data)))
    if obs.T < H:
        raise ValueError("trajectory length {} is shorter than horizon {}".format(obs.T, H))
    starts = obs.T - H + 1
    y = np.stack([obs.y[:, t : t + H + 1, :] for t in range(starts)], axis=1)
    v = np.stack([obs.v[:, t : t + H, :] for t in range(starts)], axis=1)
    return Chunks(
        y=y.reshape(-1, H + 1, obs.obs_dim),
        v=v.reshape(-1, H, obs.input_dim),
    )


def _check_chunk(chunk: Chunks, H: int, obs_dim: int = None):
    if chunk.H != H or chunk.y.shape[1] != H + 1:
        raise ShapeError(
            "chunks of horizon {} (y {}, v {}) do not match H={}".format(
                chunk.H, chunk.y.shape, chunk.v.shape, H
            )
        )
    if obs_dim is not None and chunk.y.shape[2] != obs_dim:
        raise ShapeError("chunk measurements have width {}, expected {}".format(chunk.y.shape[2], obs_dim))


def _weighted(tape: Tape, diff: int, W: np.ndarray, factor: float) -> int:
    return tape.scale(tape.square_norm_weighted(diff, W), factor)


def _accumulate(tape: Tape, acc, node: int):
    return node if acc is None else tape.add(acc, node)


def _breakdown(tape: Tape, state, inputs, consistency) -> tuple:
    """Sum the term nodes into a root and read their values."""
    terms = [n for n in (state, inputs, consistency) if n is not None]
    root = terms[0]
    for node in terms[1:]:
        root = tape.add(root, node)
    values = [0.0 if n is None else float(tape.value(n)) for n in (state, inputs, consistency)]
    return LossBreakdown(values[0], values[1], values[2], float(tape.value(root))), root


def pil_chunk_loss(
    model: PilModel,
    dyn: DynamicsFn,
    chunk: Chunks,
    cfg: PilLossConfig,
    tape: Tape,
    encoder: ObsEncoder = None,
) -> tuple:
    """Predictive imitation loss of a batch of chunks.

    x_{t|t} = decode(y_t), z = encoder(y_t), x_{t+tau|t} = G_tau(z),
    u_{t+tau-1|t} = policy(x_{t+tau-1|t}) and
    w = x_{t+tau|t} - f(x_{t+tau-1|t}, u_{t+tau-1|t}).

    :return: (LossBreakdown, root node id)
    """
    encoder = encoder or ObsEncoder("raw")
    H = cfg.H
    _check_chunk(chunk, H)
    if model.H < H:
        raise ShapeError("{} predictors for horizon {}".format(model.H, H))
    batch = len(chunk)

    y_t = tape.constant(chunk.y[:, 0])
    z = model.encoder.forward(tape, y_t)
    x_pred = [tape.constant(encoder.decode(chunk.y[:, 0]))]
    x_pred += [model.predictors[tau - 1].forward(tape, z) for tau in range(1, H + 1)]

    state = inputs = consistency = None
    for tau in range(1, H + 1):
        factor = cfg.decay(tau) / batch
        x_prev = x_pred[tau - 1]
        u = model.policy.forward(tape, x_prev)
        e_v = tape.sub(tape.constant(chunk.v[:, tau - 1]), u)
        inputs = _accumulate(tape, inputs, _weighted(tape, e_v, cfg.R, factor))

        f = tape.dynamics(dyn, x_prev, u)
        if not cfg.dynamics_gradient:
            f = tape.stop_gradient(f)
        w = tape.sub(x_pred[tau], f)
        consistency = _accumulate(tape, consistency, _weighted(tape, w, cfg.P, factor))

        e_y = tape.sub(tape.constant(chunk.y[:, tau]), tape.encode(encoder, x_pred[tau]))
        state = _accumulate(tape, state, _weighted(tape, e_y, cfg.Q, factor))
    return _breakdown(tape, state, inputs, consistency)


def rollout_chunk_loss(
    policy: Mlp,
    dyn: DynamicsFn,
    chunk: Chunks,
    cfg: PilLossConfig,
    tape: Tape,
    encoder: ObsEncoder = None,
) -> tuple:
    """Rollout-based imitation loss: unroll u = policy(x), x' = f(x, u) from decode(y_t).

    :return: (LossBreakdown with zero consistency, root node id)
    """
    encoder = encoder or ObsEncoder("raw")
    H = cfg.H
    _check_chunk(chunk, H)
    batch = len(chunk)

    x = tape.constant(encoder.decode(chunk.y[:, 0]))
    state = inputs = None
    for tau in range(1, H + 1):
        factor = cfg.decay(tau) / batch
        u = policy.forward(tape, x)
        e_v = tape.sub(tape.constant(chunk.v[:, tau - 1]), u)
        inputs = _accumulate(tape, inputs, _weighted(tape, e_v, cfg.R, factor))
        x = tape.dynamics(dyn, x, u)
        if not cfg.dynamics_gradient:
            x = tape.stop_gradient(x)
        e_y = tape.sub(tape.constant(chunk.y[:, tau]), tape.encode(encoder, x))
        state = _accumulate(tape, state, _weighted(tape, e_y, cfg.Q, factor))
    return _breakdown(tape, state, inputs, None)


def bc_chunk_loss(
    policy: Mlp, chunk: Chunks, cfg: PilLossConfig, tape: Tape, encoder: ObsEncoder = None
) -> tuple:
    """Behavior cloning loss on one-step windows: |v_t - policy(decode(y_t))|_R^2."""
    encoder = encoder or ObsEncoder("raw")
    _check_chunk(chunk, 1)
    x = tape.constant(encoder.decode(chunk.y[:, 0]))
    e_v = tape.sub(tape.constant(chunk.v[:, 0]), policy.forward(tape, x))
    inputs = _weighted(tape, e_v, cfg.R, 1.0 / len(chunk))
    return _breakdown(tape, None, inputs, None)


def chunk_loss(
    model: PilModel, dyn: DynamicsFn, chunk: Chunks, cfg: PilLossConfig, tape: Tape, encoder: ObsEncoder = None
) -> tuple:
    """Dispatch on ``cfg.mode``."""
    if cfg.mode == "pil":
        return pil_chunk_loss(model, dyn, chunk, cfg, tape, encoder)
    if cfg.mode == "rollout":
        return rollout_chunk_loss(model.policy, dyn, chunk, cfg, tape, encoder)
    return bc_chunk_loss(model.policy, chunk, cfg, tape, encoder)


def train(
    model: PilModel,
    data,
    dyn: DynamicsFn,
    cfg: PilLossConfig,
    epochs: int,
    rng: RngStream,
    encoder: ObsEncoder = None,
    batch_size: int = BATCH_SIZE,
    lr_start: float = LR_START,
    lr_end: float = LR_END,
) -> TrainingLog:
    """Train ``model`` in place with Adam and a cosine learning-rate schedule.

    Minibatches of chunks are drawn uniformly with replacement; one epoch is
    ceil(n_chunks / batch_size) steps and the schedule spans every step.

    :param PilModel model: model, updated in place
    :param data: TrajectoryDataset or ObservationView
    :param DynamicsFn dyn: known dynamics (unused in BC mode)
    :param PilLossConfig cfg: loss configuration
    :param int epochs: number of epochs
    :param RngStream rng: minibatch sampling stream
    :param ObsEncoder encoder: measurement encoding of the data

    :raises TrainingDivergenceError: on a non finite loss or gradient
    """
    if epochs < 1 or batch_size < 1:
        raise ValueError("epochs and batch_size must be positive, got {} and {}".format(epochs, batch_size))
    if cfg.mode == "pil" and model.H < cfg.H:
        raise ShapeError("PIL training needs {} predictors, model has {}".format(cfg.H, model.H))
    chunks = extract_chunks(data, cfg.window)
    n_chunks = len(chunks)
    steps_per_epoch = math.ceil(n_chunks / batch_size)
    total_steps = epochs * steps_per_epoch
    state = AdamState(size=len(model.store))
    log = TrainingLog()
    report_every = max(1, epochs // 10)
    logger.info(
        "Training {} on {} chunks: {} epochs x {} steps".format(cfg, n_chunks, epochs, steps_per_epoch)
    )

    step = 0
    for epoch in range(epochs):
        sums = np.zeros(4)
        lr = lr_start
        for batch in range(steps_per_epoch):
            lr = cosine_lr(step, total_steps, lr_start, lr_end)
            index = rng.integers(0, n_chunks, size=batch_size)
            tape = Tape(model.store)
            breakdown, root = chunk_loss(model, dyn, chunks.take(index), cfg, tape, encoder)
            if not math.isfinite(breakdown.total):
                raise TrainingDivergenceError("non finite loss", lr=lr, epoch=epoch, batch=batch)
            tape.backward(root)
            try:
                adam_step(model.store, state, lr)
            except TrainingDivergenceError:
                raise TrainingDivergenceError("non finite gradient", lr=lr, epoch=epoch, batch=batch)
            sums += (breakdown.state_err, breakdown.input_err, breakdown.consistency, breakdown.total)
            step += 1

        mean = LossBreakdown(*(sums / steps_per_epoch))
        log.append(epoch, mean, lr)
        message = "epoch {}/{}: total={:.6e} (state={:.3e}, input={:.3e}, consistency={:.3e}) lr={:.2e}".format(
            epoch + 1, epochs, mean.total, mean.state_err, mean.input_err, mean.consistency, lr
        )
        if (epoch + 1) % report_every == 0 or epoch + 1 == epochs:
            logger.info(message)
        else:
            logger.debug(message)
    return log


def evaluate_loss(
    model: PilModel, data, dyn: DynamicsFn, cfg: PilLossConfig, encoder: ObsEncoder = None
) -> LossBreakdown:
    """Loss over every chunk of ``data`` at the current parameters."""
    chunks = extract_chunks(data, cfg.window)
    tape = Tape(model.store)
    breakdown, _ = chunk_loss(model, dyn, chunks, cfg, tape, encoder)
    return breakdown


def deploy_policy(trained, encoder: ObsEncoder = None) -> DeployedPolicy:
    """Measurement feedback of a trained model (or bare policy MLP)."""
    policy = trained.policy if isinstance(trained, PilModel) else trained
    if not isinstance(policy, Mlp):
        raise TypeError("cannot deploy {}".format(type(trained)))
    return DeployedPolicy(policy, encoder)
