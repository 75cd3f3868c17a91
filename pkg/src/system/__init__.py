"""
システムモデルと整列空間（所望信号・干渉・盗聴信号行列）
"""
