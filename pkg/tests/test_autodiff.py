# -*- coding: UTF-8 -*-
#! python3

"""
    Usage from the repo root folder:

    ```python
    python -m unittest tests.test_autodiff
    ```
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# Standard library
import json
import shutil
import unittest
from pathlib import Path

# 3rd party
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

# modules
from pil_lab.autodiff import (
    AdamState,
    Mlp,
    MlpSpec,
    ParamStore,
    Tape,
    adam_step,
    cosine_lr,
    load_checkpoint,
    save_checkpoint,
)
from pil_lab.numkit import RngStream
from pil_lab.utils.errors import DatasetFormatError, ShapeError, TrainingDivergenceError
from pil_lab.worlds import ObsEncoder, PendulumParams, pendulum_dynamics

# #############################################################################
# ######## Globals #################
# ##################################

OUTPUT_DIR = Path(__file__).parent / "output" / "autodiff"

# #############################################################################
# ########## Functions #############
# ##################################


def _grad_and_fd(store: ParamStore, build, eps: float = 1e-6) -> tuple:
    """Tape gradient and central finite differences of ``build(tape) -> root``."""
    store.zero_grad()
    tape = Tape(store)
    tape.backward(build(tape))
    grad = store.grad.copy()

    fd = np.zeros(len(store))
    for i in range(len(store)):
        saved = store.flat[i]
        store.flat[i] = saved + eps
        tape = Tape(store)
        plus = float(tape.value(build(tape)))
        store.flat[i] = saved - eps
        tape = Tape(store)
        minus = float(tape.value(build(tape)))
        store.flat[i] = saved
        fd[i] = (plus - minus) / (2 * eps)
    return grad, fd


# #############################################################################
# ########## Classes ###############
# ##################################


class TestTape(unittest.TestCase):
    """Reverse-mode gradients against finite differences."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        self.rng = RngStream(11)

    #  -- Tests ------------------------------------------------------------
    def test_elementary_ops(self):
        store = ParamStore()
        a_off = store.add_segment("a", 6)
        b_off = store.add_segment("b", 8)
        c_off = store.add_segment("c", 4)
        store.flat[:] = self.rng.normal(size=len(store))
        W = np.array([[2.0, 0.5, 0.0, 0.0], [0.5, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 3.0]])
        const = self.rng.normal(size=(3, 4))

        def build(tape):
            a = tape.param(a_off, (3, 2))
            b = tape.param(b_off, (2, 4))
            c = tape.param(c_off, (4,))
            h = tape.tanh(tape.add(tape.matmul(a, b), c))
            h = tape.mul(h, tape.constant(const))
            diff = tape.sub(h, tape.scale(tape.leaky_relu(h), 0.5))
            return tape.add(tape.square_norm_weighted(diff, W), tape.sum(h))

        grad, fd = _grad_and_fd(store, build)
        assert_allclose(grad, fd, rtol=1e-5, atol=1e-7)

    def test_mlp_gradient(self):
        store = ParamStore()
        spec = MlpSpec.from_sizes(3, [5, 4], 2, hidden_activation="tanh")
        net = Mlp(spec, store, "policy", rng=self.rng)
        x = self.rng.normal(size=(6, 3))
        target = self.rng.normal(size=(6, 2))

        def build(tape):
            out = net.forward(tape, tape.constant(x))
            return tape.square_norm_weighted(tape.sub(out, tape.constant(target)), np.eye(2))

        grad, fd = _grad_and_fd(store, build)
        assert_allclose(grad, fd, rtol=1e-5, atol=1e-7)
        tape = Tape(store)
        assert_allclose(tape.value(net.forward(tape, tape.constant(x))), net.apply(x), atol=1e-14)

    def test_dynamics_and_encode_gradient(self):
        dyn = pendulum_dynamics(PendulumParams())
        encoder = ObsEncoder("trig_angle")
        store = ParamStore()
        spec = MlpSpec.from_sizes(2, [4], 1, hidden_activation="tanh")
        net = Mlp(spec, store, "policy", rng=self.rng)
        x0 = self.rng.normal(size=(5, 2))

        def build(tape):
            x = tape.constant(x0)
            total = None
            for _ in range(3):
                x = tape.dynamics(dyn, x, net.forward(tape, x))
                term = tape.square_norm_weighted(tape.encode(encoder, x), np.eye(3))
                total = term if total is None else tape.add(total, term)
            return total

        grad, fd = _grad_and_fd(store, build)
        assert_allclose(grad, fd, rtol=1e-5, atol=1e-7)

    def test_stop_gradient(self):
        store = ParamStore()
        off = store.add_segment("a", 3)
        store.flat[:] = [1.0, -2.0, 0.5]
        tape = Tape(store)
        a = tape.param(off, (3,))
        tape.backward(tape.sum(tape.mul(tape.stop_gradient(a), a)))
        assert_array_equal(store.grad, [1.0, -2.0, 0.5])

    def test_errors(self):
        store = ParamStore()
        off = store.add_segment("a", 4)
        tape = Tape(store)
        a = tape.param(off, (2, 2))
        with self.assertRaises(ShapeError):
            tape.backward(a)
        with self.assertRaises(ShapeError):
            tape.matmul(a, tape.constant(np.ones((3, 1))))
        with self.assertRaises(ShapeError):
            tape.add(a, tape.constant(np.ones(3)))
        with self.assertRaises(ValueError):
            Tape().param(0, (1,))


class TestParamsAndOptim(unittest.TestCase):
    """Parameter store, Adam and the cosine schedule."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    def tearDown(self):
        """Executed after each test."""
        shutil.rmtree(OUTPUT_DIR, ignore_errors=True)

    #  -- Tests ------------------------------------------------------------
    def test_segments(self):
        store = ParamStore()
        self.assertEqual(store.add_segment("policy", 5), 0)
        self.assertEqual(store.add_segment("predictor", 3), 5)
        self.assertEqual(store.segment_map(), {"policy": [0, 5], "predictor": [5, 8]})
        store.segment("predictor")[:] = 1.0
        self.assertEqual(store.flat.sum(), 3.0)
        with self.assertRaises(ValueError):
            store.add_segment("policy", 2)
        with self.assertRaises(ValueError):
            store.load_flat(np.zeros(7))
        with self.assertRaises(ShapeError):
            Mlp(MlpSpec([2, 2]), store, "policy")

    def test_mlp_spec(self):
        spec = MlpSpec.from_sizes(2, [16, 16], 1)
        self.assertEqual(spec.widths, [2, 16, 16, 1])
        self.assertEqual(spec.n_params, 3 * 16 + 17 * 16 + 17)
        with self.assertRaises(ValueError):
            MlpSpec([2])
        with self.assertRaises(ValueError):
            MlpSpec([2, 1], hidden_activation="sigmoid")

    def test_adam(self):
        store = ParamStore()
        store.add_segment("p", 3)
        state = AdamState(size=3)
        # first bias-corrected step moves every coordinate by lr
        store.grad[:] = [10.0, -0.1, 1e-3]
        adam_step(store, state, 0.01)
        assert_allclose(store.flat, [-0.01, 0.01, -0.01], rtol=1e-4)
        assert_array_equal(store.grad, np.zeros(3))

        for _ in range(2000):
            store.grad[:] = 2.0 * (store.flat - 3.0)
            adam_step(store, state, 0.05)
        assert_allclose(store.flat, 3.0, atol=5e-2)

        store.grad[0] = np.nan
        with self.assertRaises(TrainingDivergenceError):
            adam_step(store, state, 0.01)
        with self.assertRaises(ValueError):
            adam_step(store, AdamState(size=4), 0.01)

    def test_cosine_lr(self):
        self.assertAlmostEqual(cosine_lr(0, 100), 5e-4)
        self.assertAlmostEqual(cosine_lr(100, 100), 1e-8)
        self.assertAlmostEqual(cosine_lr(50, 100, 1.0, 0.0), 0.5)
        values = [cosine_lr(s, 10) for s in range(11)]
        self.assertEqual(values, sorted(values, reverse=True))
        with self.assertRaises(ValueError):
            cosine_lr(11, 10)
        with self.assertRaises(ValueError):
            cosine_lr(0, 0)

    def test_checkpoint(self):
        store = ParamStore()
        spec = MlpSpec.from_sizes(2, [4], 1)
        net = Mlp(spec, store, "policy", rng=RngStream(3))
        path = save_checkpoint(OUTPUT_DIR / "ckpt.json", store, {"policy": spec}, {"seed": 3})
        loaded, specs, meta = load_checkpoint(path)
        assert_array_equal(loaded.flat, store.flat)
        self.assertEqual(specs["policy"], spec)
        self.assertEqual(meta, {"seed": 3})
        x = np.array([[0.1, -0.7]])
        assert_array_equal(Mlp(specs["policy"], loaded, "policy").apply(x), net.apply(x))

        payload = json.loads(path.read_text(encoding="utf-8"))
        payload["format"] = "something-else"
        bad = OUTPUT_DIR / "bad.json"
        bad.write_text(json.dumps(payload), encoding="utf-8")
        with self.assertRaises(DatasetFormatError):
            load_checkpoint(bad)
        with self.assertRaises(DatasetFormatError):
            load_checkpoint(OUTPUT_DIR / "missing.json")


# ##############################################################################
# ##### Stand alone program ########
# ##################################
if __name__ == "__main__":
    unittest.main()
