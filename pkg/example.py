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

import threading

import graspwire
from graspwire import images
from graspwire.grasp.detector import DetectorModel
from graspwire.netproto import GraspServer
from graspwire.netproto import request_grasp

# untrained models: the point is the round trip, not the grasps
codec = graspwire.CodecModel(graspwire.CodecConfig(latent_channels=2), seed=0)
detector = DetectorModel(seed=0)

print('=== Codec ===')
print()
print('latent shape:', codec.latent_shape)
print('compression ratio: {:.2f}%'.format(codec.compression_ratio))
print('model id: 0x{:016x}'.format(codec.model_id))
print()

server = GraspServer(('127.0.0.1', 0), codec, detector)
thread = threading.Thread(target=server.serve_forever, daemon=True)
thread.start()

image = images.synthetic_images(1, seed=1)[0]
response = request_grasp(server.address, codec, image)

print('=== Response ===')
print()
print('status:', response.status.name)
print('wire bytes:', response.wire_bytes)
print('latency: {:.1f} ms'.format(response.latency_ms))
print('server decode: {:.1f} ms'.format(response.decode_ms))
print('server detect: {:.1f} ms'.format(response.detect_ms))

for candidate in response.candidates[:5]:
    print(candidate)

print()
print('=== Ratio grid ===')
print()

for entry in graspwire.ratio_grid():
    print('C={} extra={} {:>8} elements {:6.2f}%'.format(
        entry.latent_channels, entry.extra_downsample_stages, entry.latent_elements, entry.ratio))

server.shutdown()
server.server_close()
