# check if the requried the packages are installed
import os
import importlib


# installation of the required packages
required_modules = [('numpy',
                     'conda install -y numpy'),
                    ('scipy',
                     'conda install -y scipy'),
                    ('networkx',
                     'conda install -y networkx'),
                    ('pandas',
                     'conda install -y pandas')]


def check_module(module_name, install_command):
    try:
        importlib.import_module(module_name)
    except ImportError:
        os.system(install_command)


for module_name, install_command in required_modules:
    check_module(module_name, install_command)
