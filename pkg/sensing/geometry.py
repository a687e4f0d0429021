# -*- coding: utf-8 -*-
'''
结构性质：最佳 s 项逼近、锥约束、鲁棒零空间性质（RNSP）、多面体分解与 lq 商性质
'''

import logging
import math
from typing import List, Optional

import numpy as np

from utils.exceptions import (
    InvalidParameter,
    NotApplicable,
    NotInPolytope,
    NotNormalized,
    ZeroImage,
)
from utils.protocol import (
    BestSTerm,
    ConeCheckDs,
    ConeCheckLasso,
    PolytopeDecomposition,
    RnspCheck,
    RnspConstants,
    SolverConfig,
)
from .measurement import MeasurementMatrix

# 配置日志
logger = logging.getLogger(__name__)

CONE_TOLERANCE = 1e-8
RNSP_TOLERANCE = 1e-12
POLYTOPE_SLACK = 1e-12
SNAP_EPS = 1e-13
ZERO_IMAGE_TOL = 1e-14
NULL_SPACE_TOL = 1e-8


def _vector(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def _holds(lhs: float, rhs: float, tolerance: float) -> bool:
    return lhs <= rhs + tolerance * max(1.0, abs(lhs), abs(rhs))


def best_s_term(x, s: int) -> BestSTerm:
    """
    最佳 s 项逼近

    参数:
        x: 向量
        s: 0 <= s <= n

    返回:
        head 保留绝对值最大的 s 个元素（相同绝对值时下标小者优先），tail = x - head
    """
    x = _vector(x)
    if int(s) != s or not 0 <= s <= x.size:
        raise InvalidParameter(f"s 必须位于 [0, {x.size}]: {s}")
    order = np.argsort(-np.abs(x), kind="stable")
    head = np.zeros_like(x)
    keep = order[:int(s)]
    head[keep] = x[keep]
    return BestSTerm(head=head, tail=x - head)


def _l1(v: np.ndarray) -> float:
    return float(np.sum(np.abs(v)))


def cone_constraint_check_lasso(M: MeasurementMatrix, x, x_hat, s: int, lam: float) -> ConeCheckLasso:
    """
    Lasso 解的锥约束，h = x_hat - x

    ineq1: ||h_{-max(s)}||_1 <= 3||h_{max(s)}||_1 + 4||x_{-max(s)}||_1
    ineq2: ||Ah||_2^2 <= 3 lam ||h_{max(s)}||_1 + 4 lam ||x_{-max(s)}||_1
    """
    x, x_hat = _vector(x), _vector(x_hat)
    h = x_hat - x
    h_split = best_s_term(h, s)
    tail_x = _l1(best_s_term(x, s).tail)
    head_h, tail_h = _l1(h_split.head), _l1(h_split.tail)
    image = M.entries @ h

    lhs1, rhs1 = tail_h, 3.0 * head_h + 4.0 * tail_x
    lhs2, rhs2 = float(image @ image), 3.0 * lam * head_h + 4.0 * lam * tail_x
    return ConeCheckLasso(
        ineq1=_holds(lhs1, rhs1, CONE_TOLERANCE),
        ineq2=_holds(lhs2, rhs2, CONE_TOLERANCE),
        slack1=rhs1 - lhs1,
        slack2=rhs2 - lhs2,
    )


def cone_constraint_check_ds(x, x_hat, s: int) -> ConeCheckDs:
    """
    DS/QCBP 解的锥约束 ||h_{-max(s)}||_1 <= ||h_{max(s)}||_1 + 2||x_{-max(s)}||_1
    """
    x, x_hat = _vector(x), _vector(x_hat)
    h_split = best_s_term(x_hat - x, s)
    lhs = _l1(h_split.tail)
    rhs = _l1(h_split.head) + 2.0 * _l1(best_s_term(x, s).tail)
    return ConeCheckDs(holds=_holds(lhs, rhs, CONE_TOLERANCE), slack=rhs - lhs)


# 鲁棒零空间性质

def rnsp_threshold(s: int, iota: float) -> float:
    """
    MIP 推出 RNSP 的相干性阈值 sqrt(iota-1) / (sqrt(iota) (iota s - 1))
    """
    return math.sqrt(iota - 1.0) / (math.sqrt(iota) * (iota * s - 1.0))


def rnsp_threshold_three_halves(s: int) -> float:
    """
    iota = 3/2 时的闭式 1 / (sqrt(3) (3s/2 - 1))
    """
    return 1.0 / (math.sqrt(3.0) * (1.5 * s - 1.0))


def rnsp_constants(mu: float, s: int, iota: float) -> RnspConstants:
    """
    由相干性计算 RNSP 常数

    参数:
        mu: 相干性
        s: 阶数
        iota: 大于 1 的参数

    返回:
        RnspConstants，delta = iota s - 1，记 a = delta mu：
        rho = a / sqrt((iota-1)(1-a^2))，tau_l2 = 2 sqrt(1+a) / (1-a^2)，tau_ds = 2 sqrt(iota s) / (1-a^2)
    """
    if not iota > 1.0:
        raise InvalidParameter(f"iota 必须大于 1: {iota}")
    if int(s) != s or s < 1:
        raise InvalidParameter(f"s 必须是正整数: {s}")
    if not 0.0 <= mu < 1.0:
        raise InvalidParameter(f"mu 必须位于 [0, 1): {mu}")
    delta = iota * s - 1.0
    a = delta * mu
    applicable = mu < rnsp_threshold(s, iota)
    if a < 1.0:
        denominator = 1.0 - a * a
        rho = a / math.sqrt((iota - 1.0) * denominator)
        tau_l2 = 2.0 * math.sqrt(1.0 + a) / denominator
        tau_ds = 2.0 * math.sqrt(iota * s) / denominator
    else:
        rho = tau_l2 = tau_ds = math.inf
    return RnspConstants(iota=iota, s=int(s), mu=mu, delta=delta, rho=rho,
                         tau_l2=tau_l2, tau_ds=tau_ds, applicable=applicable)


def rnsp_check(M: MeasurementMatrix, x, s: int, constants: RnspConstants, bound_type: str = "l2") -> RnspCheck:
    """
    检查 ||x_max(s)||_2 <= rho ||x_{-max(s)}||_1 / sqrt(s) + tau_1 ||Ax||_2
    （bound_type=dantzig 时末项为 tau_2 ||A^T A x||_inf）
    """
    if not M.column_normalized:
        raise NotNormalized("RNSP 检查要求列归一化的矩阵")
    if not constants.applicable:
        raise NotApplicable(f"μ={constants.mu:.6g} ≥ {rnsp_threshold(constants.s, constants.iota):.6g}")
    if int(s) != constants.s:
        raise InvalidParameter(f"s={s} 与常数的阶 {constants.s} 不一致")
    x = _vector(x)
    split = best_s_term(x, s)
    image = M.entries @ x
    if bound_type == "l2":
        residual = constants.tau_l2 * float(np.linalg.norm(image))
    elif bound_type == "dantzig":
        residual = constants.tau_ds * float(np.max(np.abs(M.entries.T @ image)))
    else:
        raise InvalidParameter(f"不支持的 bound_type: {bound_type}，可选: ['l2', 'dantzig']")
    lhs = float(np.linalg.norm(split.head))
    rhs = constants.rho * _l1(split.tail) / math.sqrt(s) + residual
    return RnspCheck(holds=_holds(lhs, rhs, RNSP_TOLERANCE), lhs=lhs, rhs=rhs)


def null_space_property_check(M: MeasurementMatrix, x, s: int, constants: RnspConstants) -> RnspCheck:
    """
    零空间向量的 l1 形式: Ax = 0 时 ||x_max(s)||_1 <= rho ||x_{-max(s)}||_1
    """
    if not constants.applicable:
        raise NotApplicable(f"μ={constants.mu:.6g} ≥ {rnsp_threshold(constants.s, constants.iota):.6g}")
    x = _vector(x)
    scale = float(np.linalg.norm(M.entries, 2)) * float(np.linalg.norm(x))
    if float(np.linalg.norm(M.entries @ x)) > NULL_SPACE_TOL * max(1.0, scale):
        raise InvalidParameter("x 不在 A 的零空间内")
    split = best_s_term(x, s)
    lhs, rhs = _l1(split.head), constants.rho * _l1(split.tail)
    return RnspCheck(holds=_holds(lhs, rhs, RNSP_TOLERANCE), lhs=lhs, rhs=rhs)


# 多面体 T(kappa, s)

def polytope_membership(x, kappa: float, s: int) -> bool:
    """
    x ∈ T(kappa, s)，即 ||x||_inf <= kappa 且 ||x||_1 <= s kappa
    """
    if not kappa > 0 or s < 1:
        raise InvalidParameter(f"要求 kappa > 0 且 s >= 1: kappa={kappa}, s={s}")
    x = _vector(x)
    if x.size == 0:
        return True
    return (float(np.max(np.abs(x))) <= kappa + POLYTOPE_SLACK * kappa
            and _l1(x) <= s * kappa + POLYTOPE_SLACK * s * kappa)


def _vertex(p: np.ndarray, support: np.ndarray, kappa: float, total: float, eps: float) -> np.ndarray:
    """
    与 p 所在面相容的顶点: 已饱和坐标取 kappa，其余按幅值从大到小依次填满 kappa，余量放入下一个
    """
    vertex = np.zeros_like(p)
    tight = support[p[support] >= kappa - eps]
    vertex[tight] = kappa
    budget = total - kappa * tight.size
    free = support[p[support] < kappa - eps]
    free = free[np.argsort(-p[free], kind="stable")]
    for j in free:
        if budget <= eps:
            break
        vertex[j] = min(kappa, budget)
        budget -= vertex[j]
    return vertex


def polytope_decompose(x, kappa: float, s: int) -> PolytopeDecomposition:
    """
    将 T(kappa, s) 中的 x 写成 U(kappa, s, x) 中原子的凸组合

    原子 u 满足 ||u||_0 <= s、supp(u) ⊆ supp(x)、||u||_1 = ||x||_1、||u||_inf <= kappa。
    在幅值上逐步剥离: 取相容顶点 v，沿 p + t(p - v) 走到最远的可行点，
    v 分得 t/(1+t) 的剩余权重；每步至少新增一个饱和坐标，剩余点 s-稀疏时结束。

    参数:
        x: 向量
        kappa: 盒约束
        s: 稀疏度

    返回:
        PolytopeDecomposition
    """
    if not polytope_membership(x, kappa, s):
        raise NotInPolytope(f"x 不属于 T(kappa={kappa}, s={s})")
    x = _vector(x)
    signs = np.sign(x)
    p = np.minimum(np.abs(x), kappa)
    total = float(np.sum(p))
    eps = SNAP_EPS * kappa

    weights: List[float] = []
    atoms: List[np.ndarray] = []
    remaining = 1.0
    while np.count_nonzero(p) > s:
        support = np.flatnonzero(p)
        vertex = _vertex(p, support, kappa, total, eps)
        direction = p - vertex
        # 最大步长使 0 <= p + t d <= kappa
        with np.errstate(divide="ignore", invalid="ignore"):
            to_zero = np.where(direction < 0, -p / direction, np.inf)
            to_cap = np.where(direction > 0, (kappa - p) / direction, np.inf)
        t = float(min(np.min(to_zero), np.min(to_cap)))
        if not math.isfinite(t) or t <= 0.0:
            raise NotInPolytope("分解过程无法继续，检查 kappa 与 s")
        weights.append(remaining * t / (1.0 + t))
        atoms.append(signs * vertex)
        remaining /= 1.0 + t
        p = p + t * direction
        p[p <= eps] = 0.0
        p[p >= kappa - eps] = kappa
        p = np.clip(p, 0.0, kappa)
        # 舍入误差放回一个自由坐标，保持 ||p||_1 = ||x||_1
        free = np.flatnonzero((p > 0.0) & (p < kappa))
        if free.size:
            j = free[np.argmax(p[free])]
            p[j] = min(kappa, max(0.0, p[j] + total - float(np.sum(p))))

    weights.append(remaining)
    atoms.append(signs * p)
    logger.debug(f"[polytope_decompose] 原子个数: {len(atoms)}")
    return PolytopeDecomposition(weights=weights, atoms=atoms, count=len(atoms))


# lq 商性质

def lq_alpha(m: int, n: int, normalized: bool = True) -> float:
    """
    高斯矩阵的商性质常数: A/sqrt(m) 为 1/(34 sqrt(s*))，未缩放时为 sqrt(m)/(34 sqrt(s*))
    """
    from .bounds import s_star
    alpha = 1.0 / (34.0 * math.sqrt(s_star(m, n)))
    return alpha if normalized else math.sqrt(m) * alpha


def lq_ratio(M: MeasurementMatrix, x, cfg: Optional[SolverConfig] = None) -> float:
    """
    ||x_tilde||_1 / ||Ax||_2，x_tilde 为右端项 Ax 的基追踪解

    参数:
        M: 测量矩阵（可不归一化）
        x: 向量
        cfg: 求解器配置

    返回:
        比值；商性质以常数 alpha 成立当且仅当比值 <= 1/alpha

    异常:
        ZeroImage: ||Ax||_2 过小
        NotConverged: 基追踪未收敛
    """
    from engine.solve import solve_bp
    x = _vector(x)
    image = M.entries @ x
    norm = float(np.linalg.norm(image))
    if norm < ZERO_IMAGE_TOL:
        raise ZeroImage(f"||Ax||_2={norm:.3e} 过小")
    outcome = solve_bp(M, image, cfg).raise_if_failed()
    return outcome.objective / norm


def lq_l2_amplification(theta: float, s: int, mu: float) -> float:
    """
    l2 放大常数 1/theta + sqrt(1+(s-1)mu) / (theta sqrt(1-(s-1)mu)) + 1/sqrt(1-(s-1)mu)
    """
    if not theta > 0:
        raise InvalidParameter(f"theta 必须为正: {theta}")
    spread = (s - 1.0) * mu
    if not spread < 1.0:
        raise InvalidParameter(f"要求 (s-1)mu < 1: {spread}")
    lower = math.sqrt(1.0 - spread)
    return 1.0 / theta + math.sqrt(1.0 + spread) / (theta * lower) + 1.0 / lower
