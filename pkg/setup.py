from setuptools import setup, find_packages

setup(
    name='flock_sa',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.20',
        'pandas>=1.5',
        'openpyxl',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis>=6.0'],
    },
    entry_points={
        'console_scripts': ['flock_sa=flock_sa.cli:main'],
    },
)
