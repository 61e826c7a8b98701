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

"""Edge side: encode locally, ship the frame, wait for grasps."""

import logging
import socket

from ..checkpoint import load_checkpoint
from ..codec import encode
from ..errors import TransportError
from ..high_precision_timer import TimerMS
from .frame import CompressedFrame
from .frame import DEFAULT_MAX_MESSAGE_SIZE
from .frame import read_message
from .frame import write_message
from .response import GraspResponse

LOGGER = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0


class GraspClient(object):
    """
    One session with a :class:`~graspwire.netproto.server.GraspServer`.

    :param address: ``(host, port)``
    :param timeout: connect and reply timeout in seconds
    """

    def __init__(self, address, timeout=DEFAULT_TIMEOUT):
        self._address = tuple(address)
        self._timeout = timeout
        self._sock = None
        self._rfile = None
        self._wfile = None

    @property
    def address(self):
        return self._address

    @property
    def connected(self):
        return self._sock is not None

    def connect(self):
        try:
            self._sock = socket.create_connection(self._address, timeout=self._timeout)
        except OSError as e:
            raise TransportError('Cannot connect to {}:{}: {}'.format(
                self._address[0], self._address[1], e))

        self._rfile = self._sock.makefile('rb')
        self._wfile = self._sock.makefile('wb')
        return self

    def close(self):
        for f in (self._rfile, self._wfile, self._sock):
            if f is not None:
                try:
                    f.close()
                except OSError:
                    pass

        self._sock = self._rfile = self._wfile = None

    def __enter__(self):
        return self.connect()

    def __exit__(self, exc_type, exc_value, traceback):
        self.close()

    def send_frame(self, data):
        """Send encoded frame bytes and return the parsed reply."""
        if self._sock is None:
            self.connect()

        try:
            write_message(self._wfile, data)
            reply = read_message(self._rfile, DEFAULT_MAX_MESSAGE_SIZE)
        except OSError as e:
            self.close()
            raise TransportError('Exchange with {}:{} failed: {}'.format(
                self._address[0], self._address[1], e))

        if reply is None:
            self.close()
            raise TransportError('Server closed the connection without replying.')

        response = GraspResponse.from_bytes(reply)

        if not response.ok:
            # the server ends the session after an error status
            self.close()

        return response

    def request(self, latent):
        """
        Frame `latent`, send it and return the :class:`GraspResponse`
        with ``wire_bytes`` and ``latency_ms`` filled in.
        """
        timer = TimerMS()
        frame = CompressedFrame.from_latent(latent)
        response = self.send_frame(frame.encode())
        response.latency_ms = timer.elapsed
        response.wire_bytes = frame.wire_size
        return response


def request_grasp(server_address, encoder, image, timeout=DEFAULT_TIMEOUT):
    """
    Encode `image` with `encoder` (a :class:`~graspwire.codec.CodecModel`
    or a checkpoint path), send it and return the reply. The reported
    latency covers local encoding through the server's reply.
    """
    if not hasattr(encoder, 'encoder'):
        encoder = load_checkpoint(encoder)

    timer = TimerMS()
    latent = encode(encoder, image)

    with GraspClient(server_address, timeout) as client:
        response = client.request(latent)

    response.latency_ms = timer.elapsed
    LOGGER.info(
        '%s in %.2f ms, %d bytes on the wire, %d candidates.',
        response.status.name, response.latency_ms, response.wire_bytes, len(response.candidates))
    return response
