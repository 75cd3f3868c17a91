"""
凸部分問題（重み付き核ノルム最小化＋スペクトル下限制約）のソルバー
"""
