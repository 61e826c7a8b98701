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

import enum
import json

from ..errors import ProtocolError


class Status(enum.IntEnum):
    OK = 0
    UNKNOWN_MODEL = 1
    BAD_FRAME = 2
    FRAME_TOO_LARGE = 3
    INTERNAL_ERROR = 4


class GraspResponse(object):
    """
    The cloud's reply to one frame.

    :param status: :class:`Status`
    :param candidates: list of candidate dicts with the keys ``x``, ``y``,
        ``w``, ``h``, ``theta_deg``, ``bin`` and ``confidence``, sorted by
        descending confidence
    :param decode_ms: server time spent reconstructing the image
    :param detect_ms: server time spent detecting grasps
    :param message: diagnostic for error statuses

    The client fills in :attr:`latency_ms` and :attr:`wire_bytes` after
    the exchange; neither travels on the wire.
    """

    def __init__(self, status, candidates=None, decode_ms=0.0, detect_ms=0.0, message=''):
        self._status = Status(status)
        self._candidates = [dict(cand) for cand in (candidates or [])]
        self._decode_ms = max(0.0, float(decode_ms))
        self._detect_ms = max(0.0, float(detect_ms))
        self._message = str(message)
        self.latency_ms = None
        self.wire_bytes = None

    @property
    def status(self):
        return self._status

    @property
    def ok(self):
        return self._status == Status.OK

    @property
    def candidates(self):
        return self._candidates

    @property
    def decode_ms(self):
        return self._decode_ms

    @property
    def detect_ms(self):
        return self._detect_ms

    @property
    def message(self):
        return self._message

    def to_dict(self):
        d = {
            'status': self._status.name,
            'candidates': self._candidates,
            'decode_ms': self._decode_ms,
            'detect_ms': self._detect_ms,
            'message': self._message,
        }

        if self.latency_ms is not None:
            d['latency_ms'] = self.latency_ms
            d['wire_bytes'] = self.wire_bytes

        return d

    def to_bytes(self):
        return json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')

    @classmethod
    def from_bytes(cls, data):
        try:
            d = json.loads(data.decode('utf-8'))
            return cls(
                Status[d['status']],
                d['candidates'],
                d['decode_ms'],
                d['detect_ms'],
                d.get('message', ''))
        except (UnicodeDecodeError, ValueError, KeyError, TypeError) as e:
            raise ProtocolError('Malformed grasp response: {}'.format(e))

    def __repr__(self):
        return 'GraspResponse(status={}, candidates={})'.format(
            self._status.name, len(self._candidates))
