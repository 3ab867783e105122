"""Frame-level localization of splicing in MP3 files.

Each compressed frame is classified as single- or multiply-compressed from
codec fields read straight out of the bitstream.
"""

__version__ = "0.1.0"
