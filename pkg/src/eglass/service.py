"""HTTP session service around the exploration library.

A session pins one measured problem instance: config in, base inversion and
latent metrics computed once, then directions and steps are served from the
frozen geometry. Errors come back as {"code", "message"} JSON bodies.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from fastapi import Body, FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import generator as gen
from . import operators as ops
from . import perceptual as perc
from .config import ExperimentConfig, preset
from .explore import (
    ExplorationDirection,
    build_direction,
    default_k_top,
    eta_scale_for,
    evaluate_step,
    line_search_eta,
)
from .inversion import InversionDivergence, invert
from .linalg import CollapseError
from .metrics import LatentMetricPair, anisotropy_profile, coupling, latent_metrics


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class Session:
    config: ExperimentConfig
    g: gen.GeneratorInstance
    y: ops.MeasurementVector
    z0: np.ndarray
    base_residual: float
    metrics: LatentMetricPair
    directions: Dict[str, Tuple[ExplorationDirection, float]] = field(default_factory=dict)
    pinned: List[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


def _build_session(config: ExperimentConfig) -> Session:
    g = gen.instantiate(config.generator)
    rng = np.random.default_rng(config.truth_seed)
    z_true = config.truth_scale * rng.standard_normal(config.generator.latent_dim)
    y = ops.measure(
        config.operator, gen.generate(g, z_true), config.noise_sigma, config.noise_seed
    )
    try:
        z0, trace = invert(y, config.operator, g, config.inversion)
    except InversionDivergence as err:
        raise ServiceError(
            422, "inversion_diverged",
            f"base inversion diverged (residual {err.trace.residuals[-1]:.3e})",
        )
    metrics = latent_metrics(g, config.operator, config.features, z0)
    return Session(
        config=config, g=g, y=y, z0=z0,
        base_residual=trace.residuals[-1], metrics=metrics,
    )


def _parse_config(payload: dict, default: ExperimentConfig) -> ExperimentConfig:
    obj = payload.get("config")
    if obj is None:
        return default
    try:
        if isinstance(obj, str):
            return preset(obj)
        if isinstance(obj, dict) and set(obj) == {"preset"}:
            return preset(obj["preset"])
        if isinstance(obj, dict):
            return ExperimentConfig.from_json(obj)
    except (ValueError, TypeError, KeyError) as err:
        raise ServiceError(400, "bad_config", str(err))
    raise ServiceError(400, "bad_config", "config must be an object or preset name")


def create_app(default_config: Optional[ExperimentConfig] = None) -> FastAPI:
    if default_config is None:
        default_config = preset("sr")
    app = FastAPI(title="latent exploration service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: Dict[str, Session] = {}

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, err: ServiceError):
        return JSONResponse(
            status_code=err.status,
            content={"code": err.code, "message": err.message},
        )

    def _get(session_id: str) -> Session:
        sess = sessions.get(session_id)
        if sess is None:
            raise ServiceError(404, "unknown_session", f"no session {session_id}")
        return sess

    def _get_direction(sess: Session, direction_id: str):
        entry = sess.directions.get(direction_id)
        if entry is None:
            raise ServiceError(
                404, "unknown_direction",
                f"no direction {direction_id}; build it first",
            )
        return entry

    @app.post("/sessions")
    def create_session(payload: dict = Body(default={})):
        config = _parse_config(payload, default_config)
        sess = _build_session(config)
        session_id = uuid.uuid4().hex[:12]
        sessions[session_id] = sess
        return {
            "session_id": session_id,
            "preset": config.preset,
            "config_hash": config.config_hash(),
            "latent_dim": config.generator.latent_dim,
            "signal_shape": list(config.generator.signal_shape),
            "y": sess.y.values.tolist(),
            "base_solution": {
                "z0": sess.z0.tolist(),
                "x0": gen.generate(sess.g, sess.z0).values.tolist(),
                "residual": sess.base_residual,
            },
        }

    @app.get("/sessions/{session_id}/spectra")
    def get_spectra(session_id: str):
        sess = _get(session_id)
        mp = sess.metrics
        prof_y = anisotropy_profile(mp.eig_y.eigenvalues)
        prof_x = anisotropy_profile(mp.eig_x.eigenvalues)
        return {
            "lambda": mp.eig_y.eigenvalues.tolist(),
            "omega": mp.eig_x.eigenvalues.tolist(),
            "coupling": coupling(mp.eig_y, mp.eig_x).tolist(),
            "participation_ratio_y": prof_y.participation_ratio,
            "participation_ratio_x": prof_x.participation_ratio,
            "k_top": default_k_top(mp, sess.config.exploration),
        }

    @app.post("/sessions/{session_id}/direction")
    def make_direction(session_id: str, payload: dict = Body(default={})):
        sess = _get(session_id)
        params = sess.config.exploration
        overrides = {}
        for key in ("tau", "k_top"):
            if payload.get(key) is not None:
                overrides[key] = payload[key]
        if overrides:
            from dataclasses import replace

            try:
                params = replace(params, **overrides)
            except ValueError as err:
                raise ServiceError(400, "bad_params", str(err))
        K = payload.get("K")
        if K is not None and not 1 <= K <= sess.config.generator.latent_dim:
            raise ServiceError(
                400, "bad_source_index",
                f"K must lie in 1..{sess.config.generator.latent_dim}",
            )
        with sess.lock:
            try:
                direction = build_direction(sess.metrics, params, K=K)
            except CollapseError as err:
                hint = ""
                if K is not None and K > 1:
                    hint = f"; try K={K - 1}"
                raise ServiceError(409, "direction_collapsed", f"{err}{hint}")
            scale = eta_scale_for(sess.metrics, direction.source_index)
            upper = max(abs(e) for e in params.eta_grid) * scale
            eta_max = line_search_eta(
                sess.g, sess.config.operator, sess.y, sess.z0, direction.d,
                params.feasibility_threshold, eta_upper=upper if upper > 0 else 1.0,
            )
            sess.directions[direction.direction_id] = (direction, eta_max)
        return {
            "direction_id": direction.direction_id,
            "source_index": direction.source_index,
            "removed_set": list(direction.removed_set),
            "residual_correlations": direction.residual_correlations.tolist(),
            "rayleigh_y": direction.rayleigh_y,
            "rayleigh_x": direction.rayleigh_x,
            "eta_max": eta_max,
        }

    @app.get("/sessions/{session_id}/step")
    def step(session_id: str, direction: str, eta: float):
        sess = _get(session_id)
        dir_obj, eta_max = _get_direction(sess, direction)
        cap = 4.0 * eta_max if eta_max > 0 else 0.0
        if eta != 0.0 and abs(eta) > cap:
            raise ServiceError(
                400, "eta_out_of_range",
                f"|eta| must be at most {cap:.6g} for direction {direction}",
            )
        record = evaluate_step(
            sess.g, sess.config.operator, sess.config.features, sess.y,
            sess.z0, dir_obj, eta,
            sess.config.exploration.feasibility_threshold, 0.0,
        )
        return {
            "direction_id": direction,
            "eta": eta,
            "measurement_residual": record.measurement_residual,
            "perceptual_from_base": record.perceptual_from_base,
            "feasible": record.feasible,
            "x": record.x.values.tolist(),
            "z": record.z.tolist(),
        }

    @app.post("/sessions/{session_id}/pin")
    def pin(session_id: str, payload: dict = Body(...)):
        sess = _get(session_id)
        direction = payload.get("direction")
        eta = payload.get("eta")
        if direction is None or eta is None:
            raise ServiceError(400, "bad_pin", "pin needs direction and eta")
        dir_obj, _ = _get_direction(sess, direction)
        record = evaluate_step(
            sess.g, sess.config.operator, sess.config.features, sess.y,
            sess.z0, dir_obj, float(eta),
            sess.config.exploration.feasibility_threshold, 0.0,
        )
        entry = {
            "pin_id": len(sess.pinned),
            "direction_id": direction,
            "eta": float(eta),
            "measurement_residual": record.measurement_residual,
            "perceptual_from_base": record.perceptual_from_base,
            "feasible": record.feasible,
            "x": record.x.values.tolist(),
        }
        with sess.lock:
            entry["pin_id"] = len(sess.pinned)
            sess.pinned.append(entry)
        return entry

    @app.get("/sessions/{session_id}/solutions")
    def solutions(session_id: str):
        sess = _get(session_id)
        base = {
            "pin_id": -1,
            "direction_id": "base",
            "eta": 0.0,
            "measurement_residual": sess.base_residual,
            "perceptual_from_base": 0.0,
            "feasible": sess.base_residual
            <= sess.config.exploration.feasibility_threshold,
            "x": gen.generate(sess.g, sess.z0).values.tolist(),
        }
        return {"solutions": [base] + sess.pinned}

    return app
