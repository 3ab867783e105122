"""Forging spliced MP3 datasets with known frame labels."""

from mp3splice.forge.audio import FRAME_SAMPLES, SAMPLE_RATE, read_wav, write_wav
from mp3splice.forge.execute import ForgeReport, Reconciliation, execute_plan, reconcile, roundtrip
from mp3splice.forge.manifest import SCHEMA_VERSION, check_manifest, read_manifest, slice_plans, write_manifest
from mp3splice.forge.partition import FRACTIONS, SPLITS, partition, windows_in
from mp3splice.forge.pipeline import SplitData, forge_dataset, frame_metadata, list_sources, load_splits
from mp3splice.forge.planning import (MAX_SEGMENT, MIN_SEGMENT, SLICE_FRAMES, SlicePlan, labels_from_plans,
                                      plan_segment, segment_source)
from mp3splice.forge.specs import CBR_BITRATES, GRID, VBR_QUALITIES, CompressionSpec, draw_spec
from mp3splice.forge.synth import synthesize, write_corpus
from mp3splice.forge.tools import ENCODERS, Toolchain, build_lamecli, find_ffmpeg
