"""Deletion-channel simulation, k-mer density maps and k-subword decks.

The estimators recover, from traces alone, the positional density of every
k-mer in the source and the source's k-mer counts; brute-force oracles,
bound calculators and reconstruction back-ends sit around them.
"""

from ._version import __version__
from .analysis import (BoundsReport, DensityDistance, bound_functions, c_for, deck_traces_needed,
                       density_distance, distinguish, traces_needed)
from .bitstring import (BitString, enumerate_supersequences, interior_count, parse_bits, slice_bits,
                        subseq_count, weighted_interior_count)
from .channel import (ChannelParams, TraceMultiset, TraceSet, kernel, kernel_matrix, sample_trace_counts,
                      sample_traces, trace_distribution)
from .deck import (Deck, deck_from_occurrence_means, estimate_deck, estimate_occurrence_mean, truncation_depth,
                   wildcard_deck_estimate)
from .density import (DensityMap, density_from_position_probs, estimate_density_entry, estimate_density_map,
                      estimate_position_prob, expansion_coefficient, kmer_code, kmer_from_code)
from .errors import (EmptyDeck, EmptyTraceSet, EndpointMismatch, FormatError, GuardExceeded, HighDeletionWarning,
                     InvalidCharacter, InvalidP, KTooSmall, LengthMismatch, OutOfRange, RepeatDetected,
                     ShapeMismatch, SolveFailure, TraceDensityError)
from .oracle import (ExactStats, coefficient_by_recursion, exact_deck, exact_density_map, exact_statistics,
                     indicator_vectors, subsequence_identity_sum)
from .reconstruct import (DeBruijnGraph, build_debruijn, eulerian_paths, merge_reconstruct, ridge_indicators,
                          ridge_reconstruct)
