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

"""
Cloud side: decode frames, detect grasps, reply.

Each connection runs in its own thread and may carry any number of
request/response exchanges. An error status ends the session after the
reply is sent; other sessions are unaffected.
"""

import logging
import socketserver
from collections import namedtuple

from ..checkpoint import load_checkpoint
from ..codec import decode
from ..errors import DecodeError
from ..errors import Error
from ..errors import MessageTooLargeError
from ..errors import ProtocolError
from ..grasp.detector import detect
from ..grasp.detector import load_detector
from ..high_precision_timer import TimerMS
from ..utils import format_shape
from .frame import CompressedFrame
from .frame import read_message
from .frame import write_message
from .response import GraspResponse
from .response import Status

LOGGER = logging.getLogger(__name__)


class ServerConfig(namedtuple('ServerConfig', ['max_frame_size', 'timeout'])):
    """
    :param max_frame_size: largest accepted message in bytes; larger
        declared lengths are refused without reading the body
    :param timeout: per-connection socket timeout in seconds
    """

    __slots__ = ()

    def __new__(cls, max_frame_size=4 * 1024 * 1024, timeout=30.0):
        self = super(ServerConfig, cls).__new__(cls, int(max_frame_size), float(timeout))

        if self.max_frame_size < 1:
            raise Error('Expected a positive max_frame_size, but got {}.'.format(max_frame_size))

        if self.timeout <= 0:
            raise Error('Expected a positive timeout, but got {}.'.format(timeout))

        return self


class _SessionHandler(socketserver.StreamRequestHandler):

    def setup(self):
        self.timeout = self.server.config.timeout
        socketserver.StreamRequestHandler.setup(self)

    def _reply(self, response):
        try:
            write_message(self.wfile, response.to_bytes())
        except OSError as e:
            LOGGER.debug('%s: reply failed: %s', self.client_address, e)
            return False

        return True

    def handle(self):
        LOGGER.debug('%s: session opened', self.client_address)

        while True:
            try:
                data = read_message(self.rfile, self.server.config.max_frame_size)
            except MessageTooLargeError as e:
                LOGGER.warning('%s: %s', self.client_address, e)
                self._reply(GraspResponse(Status.FRAME_TOO_LARGE, message=str(e)))
                break
            except ProtocolError as e:
                LOGGER.warning('%s: %s', self.client_address, e)
                self._reply(GraspResponse(Status.BAD_FRAME, message=str(e)))
                break
            except OSError as e:
                LOGGER.debug('%s: read failed: %s', self.client_address, e)
                break

            if data is None:
                break

            response = self.server.process_frame(data)

            if not self._reply(response) or not response.ok:
                break

        LOGGER.debug('%s: session closed', self.client_address)


class GraspServer(socketserver.ThreadingTCPServer):
    """
    Threaded TCP server holding one codec and one detector.

    :param address: ``(host, port)`` to bind, port 0 picks a free one
    :param codec: :class:`~graspwire.codec.CodecModel` whose decoder is used
    :param detector: :class:`~graspwire.grasp.detector.DetectorModel`
    :param config: :class:`ServerConfig`
    """

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, codec, detector, config=None):
        self._codec = codec
        self._detector = detector
        self._config = config or ServerConfig()
        self._model_id = codec.model_id
        socketserver.ThreadingTCPServer.__init__(self, address, _SessionHandler)

    @property
    def config(self):
        return self._config

    @property
    def model_id(self):
        return self._model_id

    @property
    def address(self):
        return self.server_address[:2]

    def process_frame(self, data):
        """Turn one encoded frame into a :class:`GraspResponse`."""
        try:
            frame = CompressedFrame.decode(data)
        except DecodeError as e:
            LOGGER.warning('Rejected frame: %s', e)
            return GraspResponse(Status.BAD_FRAME, message=str(e))

        if frame.model_id != self._model_id:
            LOGGER.warning(
                'Frame for model 0x%016x, serving 0x%016x.', frame.model_id, self._model_id)
            return GraspResponse(
                Status.UNKNOWN_MODEL,
                message='Unknown model 0x{:016x}.'.format(frame.model_id))

        if frame.shape != self._codec.latent_shape:
            return GraspResponse(
                Status.BAD_FRAME,
                message='Expected a {} latent, but got {}.'.format(
                    format_shape(self._codec.latent_shape), format_shape(frame.shape)))

        try:
            timer = TimerMS()
            image = decode(self._codec, frame.latent())
            decode_ms = timer.elapsed
            timer.reset()
            candidates = detect(self._detector, image)
            detect_ms = timer.elapsed
        except Exception as e:
            LOGGER.exception('Grasp detection failed.')
            return GraspResponse(Status.INTERNAL_ERROR, message=str(e))

        LOGGER.debug(
            'decode %.2f ms, detect %.2f ms, %d candidates', decode_ms, detect_ms, len(candidates))

        return GraspResponse(
            Status.OK, [cand.to_dict() for cand in candidates], decode_ms, detect_ms)


def serve(bind_address, decoder_checkpoint, detector_checkpoint, config=None):
    """Load both checkpoints and serve until interrupted."""
    codec = load_checkpoint(decoder_checkpoint)
    detector = load_detector(detector_checkpoint)
    server = GraspServer(bind_address, codec, detector, config)

    LOGGER.info(
        'Serving model 0x%016x on %s:%d.', server.model_id, server.address[0], server.address[1])

    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        LOGGER.info('Server stopped.')
