"""Multiple-instance regression of engagement intensity from video segments."""

from ._core import (
    EngageError,
    MilNet,
    SeqNet,
    SvrModel,
    bayesian_ridge_train,
    evaluate,
    fuse_labels,
    kmeans,
    lbp_top,
    load_net,
    mean_pool,
    mse,
    pcc,
    pose_gaze_feature,
    quadratic_weighted_kappa,
    read_dataset,
    resample_indices,
    segment,
    sgd_linear_train,
    split_subject_independent,
    svr_train,
    synth_generate,
    topk_pool,
    train_milnet,
    train_seqnet,
    uniform_bin,
    write_dataset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
