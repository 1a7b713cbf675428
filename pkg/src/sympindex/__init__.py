"""Iterated Maslov-type indices, common index jumps with mixed-sign mean indices, and Morse bookkeeping."""

__version__ = "0.1.0"

from .cij import (AbstractJumpInstance, JumpCertificate, JumpInstance, dual_certificate, solve_abstract,
                  solve_paths, verify_abstract, verify_certificate)
from .errors import (CheckFailed, HypothesisViolation, IndexToolError, InconsistentData, InfiniteMorseNumber,
                     ParseError, PrecisionError, ScanExhausted, UndecidableSign, VerificationFailure)
from .iteration import (PathGerm, deviation_bound, index_at, mean_index, nullity_at, stable_jump_horizon,
                        viterbo_index)
from .ledger import (PrimeCharacteristic, SurfaceModel, average_euler_char, is_good_iterate, is_perfect,
                     morse_numbers, multiplicity_report, resonance_residuals, zero_mean_profile)
from .normal_form import D, N1, N2, R, NormalForm, OffCircle, classify_matrix, diamond_sum, splitting_pair
from .rotation import LinearForm, RotationNumber, golden_rotation, relation, silver_rotation
