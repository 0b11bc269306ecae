# pytest collection for the evroute test suite
#
# Each tests/<module>_<op>.py defines a function of the same name returning
# ok (True/False); the check_<module>.py runners exec them in turn.  This hook
# lets pytest collect the same functions and requires each to return True.
import importlib
import os
import sys

import pytest

_here = os.path.dirname(os.path.abspath(__file__))
if _here not in sys.path:
    sys.path.insert(0, _here)


def pytest_collect_file(parent, file_path):
    name = file_path.stem
    if (file_path.suffix == '.py' and file_path.parent == parent.config.rootpath / 'tests'
            and name not in ('conftest',) and not name.startswith('check_')):
        return OkFile.from_parent(parent, path=file_path)
    return None


class OkFile(pytest.File):
    def collect(self):
        yield OkItem.from_parent(self, name=self.path.stem)


class OkItem(pytest.Item):
    def runtest(self):
        module = importlib.import_module(self.name)
        ok = getattr(module, self.name)()
        assert ok, self.name + ' returned ' + repr(ok)

    def reportinfo(self):
        return self.path, 0, self.name
