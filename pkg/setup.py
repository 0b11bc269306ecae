from setuptools import setup

setup(name='evroute',
      version='0.1.0',
      description='routing and charging game of electric vehicles: '
                  'equilibria, efficiency and load balance',
      license='MIT',
      packages=['evroute'],
      package_dir={'evroute': 'src/evroute'},
      install_requires=['numpy', 'scipy', 'networkx', 'pandas'],
      entry_points={'console_scripts': ['evroute=evroute.cli:main']},
      zip_safe=False)
