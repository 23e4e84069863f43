"""Scene-flow accuracy metrics over matched point sets."""
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..motion.pointset import PointMotionSet


@dataclass(frozen=True)
class MotionEvalReport:
    """EPE in centimeters plus accuracy fractions at the 5 and 10 thresholds."""

    epe: float
    acc5: float
    acc10: float
    count: int


def _accuracy(err_cm: np.ndarray, gt_cm: np.ndarray, threshold: float) -> float:
    # a vector passes if its error is under the absolute threshold OR under
    # threshold percent of the ground-truth magnitude; for zero ground truth
    # the relative branch is vacuous, leaving the absolute test
    hits = (err_cm < threshold) | (err_cm < 0.01 * threshold * gt_cm)
    return float(hits.mean())


def eval_motion(pred: PointMotionSet, gt: PointMotionSet) -> MotionEvalReport:
    """Mean end-point error (cm) and accuracy fractions of pred against gt.

    Both sets must cover the same points in the same order. Volumetric fields
    are expected to be resampled to point sets before evaluation.
    """
    if len(pred) != len(gt):
        raise InvalidArgumentError(
            f"prediction has {len(pred)} vectors but ground truth has {len(gt)}"
        )
    if len(pred) == 0:
        raise InvalidArgumentError("nothing to evaluate: empty point sets")
    if not np.allclose(pred.points, gt.points, atol=1e-5):
        raise InvalidArgumentError("prediction and ground truth points differ")

    err_cm = 100.0 * np.linalg.norm(pred.motions - gt.motions, axis=1)
    gt_cm = 100.0 * np.linalg.norm(gt.motions, axis=1)
    return MotionEvalReport(
        epe=float(err_cm.mean()),
        acc5=_accuracy(err_cm, gt_cm, 5.0),
        acc10=_accuracy(err_cm, gt_cm, 10.0),
        count=len(pred),
    )
