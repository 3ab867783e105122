"""Bit-exact MPEG-1 Layer III parsing down to granule 0 / channel 0 fields."""

from mp3splice.bitstream.bitreader import BitReader
from mp3splice.bitstream.frames import FrameHeader, StreamInfo, parse_header, scan_frames, scan_stream
from mp3splice.bitstream.huffman import huffman_decode
from mp3splice.bitstream.records import (CodecFrameRecord, MdctCoefficients, ParsedFile, UnusableFrame,
                                         extract_codec_record, parse_file, record_to_dict)
from mp3splice.bitstream.requantize import requantize
from mp3splice.bitstream.scalefactors import ScaleFactors, decode_scalefactors
from mp3splice.bitstream.sideinfo import SideInfo, parse_side_info

__all__ = [
    "BitReader", "CodecFrameRecord", "FrameHeader", "MdctCoefficients", "ParsedFile", "ScaleFactors",
    "SideInfo", "StreamInfo", "UnusableFrame", "decode_scalefactors", "extract_codec_record",
    "huffman_decode", "parse_file", "parse_header", "parse_side_info", "record_to_dict", "requantize",
    "scan_frames", "scan_stream",
]
