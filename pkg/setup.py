import os

from setuptools import find_packages, setup

base_path = os.path.abspath(os.path.dirname(__file__))

with open(os.path.join(base_path, 'requirements.txt')) as handle:
    requirements = [line.strip() for line in handle if line.strip() and not line.startswith('pytest')]

setup(
    name='soqe-kit',
    version='1.0.0',
    description='Second-order quantifier elimination with constrained resolution and local theory extensions',
    packages=find_packages(include=['app', 'app.*']),
    package_data={'app': ['templates/*.j2']},
    python_requires='>=3.9',
    install_requires=requirements,
    extras_require={'test': ['pytest==7.4.4']},
    entry_points={
        'console_scripts': [
            'soqe-kit=app.cli:main',
        ],
    },
)
