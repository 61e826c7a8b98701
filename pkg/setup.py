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

from setuptools import find_packages
from setuptools import setup

LONG_DESCRIPTION = '''\
Edge-cloud grasp detection over compressed image latents

A robot-side encoder squeezes each camera image into a small latent
tensor, ships it to a server in a checksummed binary frame, and the
server reconstructs the image with the paired decoder and runs a
two-stage oriented grasp detector on it.

Included:
A small reverse-mode autodiff engine on numpy
Convolutional encoder/decoder with adversarial training
PSNR, SSIM and MS-SSIM quality metrics
Anchor-based grasp proposal and orientation-bin configuration stages
Cornell-style grasp rectangle annotation parser
Bit-exact latent frame format, threaded TCP server and client
Decoder mismatch measurement for intercepted latents
'''

setup(
    name='graspwire',
    version='0.1.0b',
    license='MIT',
    description='Edge-cloud grasp detection over compressed image latents',
    long_description=LONG_DESCRIPTION,
    keywords=['grasp detection', 'image compression', 'edge computing', 'autoencoder', 'ssim'],
    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
    ],
    packages=find_packages(exclude=['tests']),
    python_requires='>=3.7',
    install_requires=['numpy', 'scipy', 'Pillow', 'bitstruct', 'textparser'],
    extras_require={'tests': ['pytest']},
    entry_points={'console_scripts': ['graspwire = graspwire.cli:main']},
)
