import pytest

from mallowsAvoid.core.errors import DomainError
from mallowsAvoid.core.excel_manager import ExcelManager, read_sheet


def test_write_and_read_back(tmp_path):
    path = str(tmp_path / "out" / "cotas.xlsx")
    manager = ExcelManager(path)
    manager.add_sheet("bounds", ["q", "LB", "UB"], [[0.5, 0.801, 0.806], [0.9, 0.8028, 0.8215]],
                      metadata={"eps": 0.01})
    manager.add_sheet("un nombre de hoja demasiado largo para excel", ["a"], [[1]])
    assert manager.save() == path

    rows = read_sheet(path, "bounds")
    assert rows[0] == ["q", "LB", "UB"]
    assert rows[1] == [0.5, 0.801, 0.806]
    assert rows[4][:2] == ["eps", 0.01]
    assert read_sheet(path, "un nombre de hoja demasiado lar") == [["a"], [1]]


def test_requires_xlsx_path():
    with pytest.raises(DomainError):
        ExcelManager("")
    with pytest.raises(DomainError):
        ExcelManager("salida.csv")


def test_unknown_sheet(tmp_path):
    path = str(tmp_path / "libro.xlsx")
    manager = ExcelManager(path)
    manager.add_sheet("datos", ["x"], [[(1, 2)]])
    manager.save()
    assert read_sheet(path, "datos")[1] == ["(1, 2)"]
    with pytest.raises(DomainError):
        read_sheet(path, "otra")
