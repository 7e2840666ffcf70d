#!/usr/bin/env python3
"""
Setup script for disk-epsilon-net package.
"""

from setuptools import setup
import os

# Read the README file
def read_file(filename):
    with open(os.path.join(os.path.dirname(__file__), filename), encoding='utf-8') as f:
        return f.read()

setup(
    name='disk-epsilon-net',
    version='0.2.0',
    description='Small epsilon-nets for disks in the plane by sampling and Delaunay refinement',
    long_description=read_file('README.md'),
    long_description_content_type='text/markdown',
    packages=['disk_epsilon_net'],
    package_data={
        'disk_epsilon_net': ['py.typed'],
    },
    install_requires=['numpy>=1.26'],
    python_requires='>=3.12',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.12',
        'Programming Language :: Python :: 3.13',
        'Programming Language :: Python :: 3.14',
        'Operating System :: OS Independent',
        'Environment :: Console',
    ],
    keywords='epsilon-net computational-geometry delaunay disks sampling',
    entry_points={
        'console_scripts': [
            'disk-epsilon-net=disk_epsilon_net.cli:main',
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
