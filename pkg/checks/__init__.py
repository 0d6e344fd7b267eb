"""
Checksパッケージ

CLIのコマンドごとの検査グループを提供します。
各モジュールは setup(config) で検査グループを返し、run() で CheckResult の一覧を返します。
"""

__all__ = [
    'curvature',
    'lie',
    'soliton',
    'potential',
    'classify',
    'fit_probe',
    'separation',
]
