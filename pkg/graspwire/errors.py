# MIT License
#
# Copyright (c) 2021 The graspwire developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.


class Error(Exception):
    """Base exception for all exception in the package."""
    pass


class ShapeError(Error):
    """A tensor or image does not have the extents an operation requires."""
    pass


class ParseError(Error):
    """Annotation or index text could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {}: {}'.format(line, message)

        super(ParseError, self).__init__(message)
        self.line = line


class DatasetError(Error):
    pass


class ScaleError(Error):
    """The image is too small for the requested number of MS-SSIM scales."""
    pass


class TrainingError(Error):
    pass


class EncodeError(Error):
    pass


class DecodeError(Error):
    pass


class BadMagicError(DecodeError):
    pass


class UnsupportedVersionError(DecodeError):
    pass


class CrcMismatchError(DecodeError):
    pass


class LengthMismatchError(DecodeError):
    pass


class UnknownElementKindError(DecodeError):
    pass


class CheckpointError(Error):
    pass


class CheckpointFormatError(CheckpointError):
    """Bad magic or an unsupported format version."""
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointMismatchError(CheckpointError):
    """The stored config, parameter count or content hash disagree."""
    pass


class ProtocolError(Error):
    """The peer violated the request/response session rules."""
    pass


class TransportError(Error):
    """Connection refused, reset or timed out before a reply arrived."""
    pass


class MessageTooLargeError(ProtocolError):
    """A length prefix declared more bytes than the receiver accepts."""
    pass
