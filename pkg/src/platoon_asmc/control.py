"""Two-stage tracking controller for one robot.

Stage 1 (kinematic): backstepping law turning a body-frame posture error into
velocity commands (v_c, omega_c). Stage 2 (dynamic): sliding-mode force/torque
laws with online gain adaptation. The proposed variant carries state-dependent
switching-gain terms; the baseline variant keeps only the constant terms and
serves as the comparison controller.

The controller is a discrete-time component: integral and gain states advance
with explicit Euler at the control period, independently of the plant
integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class KinematicGains:
    k1: float = 5.0
    k2: float = 3.0
    k3: float = 2.0

    def validate(self) -> None:
        for name in ("k1", "k2", "k3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class PostureError:
    """Body-frame tracking error: longitudinal e1 (m), lateral e2 (m), heading e3 (rad)."""

    e1: float
    e2: float
    e3: float


@dataclass(frozen=True)
class VelocityReference:
    v_d: float
    omega_d: float


@dataclass(frozen=True)
class VelocityCommand:
    v_c: float
    omega_c: float


@dataclass(frozen=True)
class AsmcConfig:
    """Gains of the sliding-mode layer.

    phi_v/phi_w weight the error integral in the sliding variables; Lambda_v /
    Lambda_w are the linear sliding gains; the alpha_* are leakage rates of the
    six adaptive gains; epsilon_bl is the boundary-layer width replacing the
    hard sign with a saturation; k_init seeds all six adaptive gains (> 0);
    gain_clamp optionally caps the gains against numerical escape in
    pathological configs (None disables, and validation-grade runs disable it
    so it cannot mask instability).
    """

    phi_v: float = 0.5
    phi_w: float = 0.1
    Lambda_v: float = 3.0
    Lambda_w: float = 2.0
    alpha_v0: float = 2.5
    alpha_v1: float = 2.5
    alpha_w2: float = 3.0
    alpha_w0: float = 5.0
    alpha_w1: float = 5.0
    alpha_v2: float = 1.5
    epsilon_bl: float = 0.05
    k_init: float = 0.01
    gain_clamp: float | None = 1e4

    def validate(self) -> None:
        positive = (
            "phi_v", "phi_w", "Lambda_v", "Lambda_w",
            "alpha_v0", "alpha_v1", "alpha_w2", "alpha_w0", "alpha_w1", "alpha_v2",
            "epsilon_bl", "k_init",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.gain_clamp is not None and not self.gain_clamp > 0:
            raise ValueError(f"gain_clamp must be > 0 or null, got {self.gain_clamp}")

    def max_alpha(self) -> float:
        return max(self.alpha_v0, self.alpha_v1, self.alpha_w2,
                   self.alpha_w0, self.alpha_w1, self.alpha_v2)


@dataclass
class AdaptiveState:
    """Per-robot adaptive gains and controller integral states.

    The six gains stay strictly positive for positive initialisation as long
    as alpha * dt < 1 (checked by the episode engine); int_ev / int_ew are the
    running integrals of the velocity tracking errors.
    """

    K_v0: float = 0.01
    K_v1: float = 0.01
    K_w2: float = 0.01
    K_w0: float = 0.01
    K_w1: float = 0.01
    K_v2: float = 0.01
    int_ev: float = 0.0
    int_ew: float = 0.0

    @classmethod
    def fresh(cls, k_init: float) -> "AdaptiveState":
        return cls(K_v0=k_init, K_v1=k_init, K_w2=k_init,
                   K_w0=k_init, K_w1=k_init, K_v2=k_init)

    def gains(self) -> tuple[float, float, float, float, float, float]:
        return (self.K_v0, self.K_v1, self.K_w2, self.K_w0, self.K_w1, self.K_v2)


@dataclass(frozen=True)
class SlidingVars:
    """Sliding variables and the signals they were built from.

    int_v / int_w are the integral values actually used, so
    s_v == e_v + phi_v * int_v holds exactly (likewise for the yaw channel).
    """

    s_v: float
    s_w: float
    e_v: float
    e_w: float
    int_v: float
    int_w: float
    xi_v_norm: float
    xi_w_norm: float


def posture_error(x: float, y: float, theta: float,
                  x_r: float, y_r: float, theta_r: float) -> PostureError:
    """Rotate the inertial pose error into the robot body frame.

    e1 = cos(th)*dx + sin(th)*dy, e2 = -sin(th)*dx + cos(th)*dy, e3 = dth
    wrapped to (-pi, pi] so full revolutions never produce large commands.
    """
    dx = x_r - x
    dy = y_r - y
    c = math.cos(theta)
    s = math.sin(theta)
    return PostureError(
        e1=c * dx + s * dy,
        e2=-s * dx + c * dy,
        e3=wrap_angle(theta_r - theta),
    )


def kinematic_control(err: PostureError, ref: VelocityReference,
                      gains: KinematicGains) -> VelocityCommand:
    """Backstepping velocity law: v_c = v_d cos e3 + k1 e1,
    omega_c = omega_d + k2 v_d e2 + k3 v_d sin e3."""
    return VelocityCommand(
        v_c=ref.v_d * math.cos(err.e3) + gains.k1 * err.e1,
        omega_c=ref.omega_d + gains.k2 * ref.v_d * err.e2
        + gains.k3 * ref.v_d * math.sin(err.e3),
    )


def update_sliding(adaptive: AdaptiveState, v: float, omega: float,
                   cmd: VelocityCommand, cfg: AsmcConfig, dt: float) -> SlidingVars:
    """Compute sliding variables at the current sample and advance the integrals.

    s uses the integral accumulated up to (not including) this sample, so a
    constant error e held from t=0 yields s(t) = e * (1 + phi * t) exactly on
    the sample grid. The integrals in `adaptive` are then advanced by e * dt
    for the next call.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e_v = v - cmd.v_c
    e_w = omega - cmd.omega_c
    int_v = adaptive.int_ev
    int_w = adaptive.int_ew
    sv = SlidingVars(
        s_v=e_v + cfg.phi_v * int_v,
        s_w=e_w + cfg.phi_w * int_w,
        e_v=e_v,
        e_w=e_w,
        int_v=int_v,
        int_w=int_w,
        xi_v_norm=math.hypot(e_v, int_v),
        xi_w_norm=math.hypot(e_w, int_w),
    )
    adaptive.int_ev = int_v + e_v * dt
    adaptive.int_ew = int_w + e_w * dt
    return sv


def _sat(x: float) -> float:
    """Boundary-layer saturation: clip to [-1, 1]."""
    if x > 1.0:
        return 1.0
    if x < -1.0:
        return -1.0
    return x


def asmc_force(sv: SlidingVars, adaptive: AdaptiveState, cfg: AsmcConfig) -> float:
    """Force law F = -Lambda_v s_v - rho_v sat(s_v/eps) with the
    state-dependent bound rho_v = K_v0 + K_v1 |xi_v| + K_w2 |xi_w|."""
    rho = adaptive.K_v0 + adaptive.K_v1 * sv.xi_v_norm + adaptive.K_w2 * sv.xi_w_norm
    return -cfg.Lambda_v * sv.s_v - rho * _sat(sv.s_v / cfg.epsilon_bl)


def asmc_torque(sv: SlidingVars, adaptive: AdaptiveState, cfg: AsmcConfig) -> float:
    """Torque law, mirror of `asmc_force` on the yaw channel with
    rho_w = K_w0 + K_w1 |xi_w| + K_v2 |xi_v|."""
    rho = adaptive.K_w0 + adaptive.K_w1 * sv.xi_w_norm + adaptive.K_v2 * sv.xi_v_norm
    return -cfg.Lambda_w * sv.s_w - rho * _sat(sv.s_w / cfg.epsilon_bl)


def baseline_asmc(sv: SlidingVars, adaptive: AdaptiveState,
                  cfg: AsmcConfig) -> tuple[float, float]:
    """Bounded-gain comparison controller.

    Same structure as the proposed laws but with the state-dependent terms
    removed: rho_v = K_v0 and rho_w = K_w0 only, i.e. a switching gain that
    can only track an a-priori-bounded uncertainty level.
    """
    F = -cfg.Lambda_v * sv.s_v - adaptive.K_v0 * _sat(sv.s_v / cfg.epsilon_bl)
    tau = -cfg.Lambda_w * sv.s_w - adaptive.K_w0 * _sat(sv.s_w / cfg.epsilon_bl)
    return F, tau


def _clamp_gain(k: float, clamp: float | None) -> float:
    if k <= 0.0:
        # unreachable when alpha * dt < 1 and the incoming gain is positive;
        # guards direct API use with an oversized step
        raise ValueError(
            f"adaptive gain left the positive domain ({k}); "
            "alpha * dt must stay below 1")
    if clamp is not None and k > clamp:
        return clamp
    return k


def adapt_gains(adaptive: AdaptiveState, sv: SlidingVars, cfg: AsmcConfig,
                dt: float) -> AdaptiveState:
    """Advance the six adaptive-gain ODEs one explicit-Euler step (in place).

    Drives: K_v0 <- |s_v|; K_v1 <- |s_v||xi_v|; K_w0 <- |s_w|;
    K_w1 <- |s_w||xi_w|; and the cross-coupled pair K_w2 <- |s_w||xi_w|
    (used by the force law) and K_v2 <- |s_v||xi_v| (used by the torque law).
    Each gain leaks at its own alpha rate.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    abs_sv = abs(sv.s_v)
    abs_sw = abs(sv.s_w)
    drive_v = abs_sv * sv.xi_v_norm
    drive_w = abs_sw * sv.xi_w_norm
    c = cfg.gain_clamp
    adaptive.K_v0 = _clamp_gain(adaptive.K_v0 + dt * (abs_sv - cfg.alpha_v0 * adaptive.K_v0), c)
    adaptive.K_v1 = _clamp_gain(adaptive.K_v1 + dt * (drive_v - cfg.alpha_v1 * adaptive.K_v1), c)
    adaptive.K_w2 = _clamp_gain(adaptive.K_w2 + dt * (drive_w - cfg.alpha_w2 * adaptive.K_w2), c)
    adaptive.K_w0 = _clamp_gain(adaptive.K_w0 + dt * (abs_sw - cfg.alpha_w0 * adaptive.K_w0), c)
    adaptive.K_w1 = _clamp_gain(adaptive.K_w1 + dt * (drive_w - cfg.alpha_w1 * adaptive.K_w1), c)
    adaptive.K_v2 = _clamp_gain(adaptive.K_v2 + dt * (drive_v - cfg.alpha_v2 * adaptive.K_v2), c)
    return adaptive


def adapt_gains_baseline(adaptive: AdaptiveState, sv: SlidingVars, cfg: AsmcConfig,
                         dt: float) -> AdaptiveState:
    """Baseline adaptation: only the constant-bound gains K_v0 / K_w0 adapt;
    the state-dependent gains are left untouched (they are not used)."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    c = cfg.gain_clamp
    adaptive.K_v0 = _clamp_gain(
        adaptive.K_v0 + dt * (abs(sv.s_v) - cfg.alpha_v0 * adaptive.K_v0), c)
    adaptive.K_w0 = _clamp_gain(
        adaptive.K_w0 + dt * (abs(sv.s_w) - cfg.alpha_w0 * adaptive.K_w0), c)
    return adaptive
