"""One-shot SSVEP classification toolkit.

Library + CLI for decoding steady-state visual evoked potentials when only
one calibration trial per stimulus is available: sine-cosine reference
templates, per-stimulus least-squares domain transforms, SAME data
augmentation, TRCA/TDCA/FBCCA spatial decoders, a dual-domain fusion
network trained on source subjects, score-level fusion, and a
leave-one-subject-out benchmark harness with synthetic-data verification.
"""

from .core import (UNLABELED, DatasetManifest, EpochTensor, StimulusSpec,
                   ValidationReport, WindowSpec, epoch_window, group_by_class,
                   validate_dataset)
from .decoders import (CcaResult, ETRCA, FBCCA, ScoreVector, TDCA, TdcaModel,
                       TrcaModel, cca_correlations, delay_augment, etrca_score,
                       fbcca_score, load_tdca_model, load_trca_model,
                       save_tdca_model, save_trca_model, tdca_score,
                       tdca_train, trca_train)
from .errors import ToolkitError
from .filterbank import (BandpassDesign, FilterBankSpec, default_filter_bank,
                         design_bandpass, fb_weights, filterbank_decompose,
                         zero_phase_filter)
from .fusion import FusionConfig, fuse_and_decide, minmax_normalize
from .harness import (FoldResult, RunConfig, ablation_run, evaluate_fold,
                      loso_evaluate, report_emit, summarize)
from .io import (epochs_from_tensors, load_dataset, load_tensor_bundle,
                 read_subject_file, save_dataset, save_tensor_bundle,
                 write_subject_file)
from .metrics import itr
from .network import (AdamState, DualDomainNet, NetConfig, NetOutputs,
                      adam_step, net_backward, net_forward, net_grad,
                      net_infer, net_init, net_loss, parameter_count,
                      train_network)
from .references import ReferenceTemplate, sine_cosine_template, template_bank
from .synth import SynthSpec, synth_generate
from .transform import (AliasingMatrix, LstMatrix, PerStimulusLst,
                        TransformStack, apply_stimulus_transforms,
                        estimate_stimulus_transforms, lst_solve, same_augment)

__version__ = "0.1.0"
