#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
文件处理模块 - 负责文件类型判断、快照(PFS1)、曲线与时间序列CSV的读写
"""

import logging
import os

import numpy as np
from PIL import Image

from .diagnostics import CSV_HEADER, TimeSeriesRecord
from .geometry import Curve, extract_zero_levelset, largest_component
from .grid import Field, GridSpec

# 获取日志记录器
logger = logging.getLogger("acflow.file_handler")

PFS_MAGIC = b"PFS1\n"
CURVE_HEADER = "x,y"


class FileHandler:
    """文件处理类，负责文件类型判断和各种结果文件的读写"""

    def get_file_type(self, file_path):
        """
        根据文件扩展名判断文件类型

        Args:
            file_path (str): 文件路径

        Returns:
            str: 文件类型 ('pfs', 'csv', 'cfg' 或 None)
        """
        # 获取文件扩展名并转为小写
        _, ext = os.path.splitext(file_path)
        ext = ext.lower()

        if ext == ".pfs":
            return "pfs"
        elif ext == ".csv":
            return "csv"
        elif ext in (".cfg", ".conf", ".ini"):
            return "cfg"
        else:
            return None

    def validate_file(self, file_path, expected=None):
        """
        验证文件是否存在且是否为支持的类型

        Args:
            file_path (str): 文件路径
            expected (str, optional): 期望的文件类型

        Returns:
            tuple: (是否有效, 错误消息)
        """
        # 检查文件是否存在
        if not os.path.exists(file_path):
            return False, f"文件 '{file_path}' 不存在"

        # 检查文件是否为常规文件
        if not os.path.isfile(file_path):
            return False, f"'{file_path}' 不是一个文件"

        # 检查文件类型
        file_type = self.get_file_type(file_path)
        if file_type is None:
            return False, "不支持的文件类型，仅支持 .pfs、.csv 和配置文件"
        if expected is not None and file_type != expected:
            return False, f"文件类型 '{file_type}' 与期望的 '{expected}' 不一致"

        return True, None

    def write_snapshot(self, path, u, time, eps):
        """
        写出PFS1快照: 魔数行、文本头 "nx ny Lx Ly time eps"，随后是按行存储的小端 float64

        Args:
            path (str): 输出路径
            u (Field): 序参量场
            time (float): 时间
            eps (float): ε
        """
        spec = u.spec
        header = (
            f"{spec.nx} {spec.ny} {float(spec.Lx)!r} {float(spec.Ly)!r} "
            f"{float(time)!r} {float(eps)!r}\n"
        )
        with open(path, "wb") as f:
            f.write(PFS_MAGIC)
            f.write(header.encode("ascii"))
            f.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())
        logger.debug(f"写出快照: {path} (t = {time:.6g})")

    def read_snapshot(self, path):
        """
        读取PFS1快照

        Args:
            path (str): 快照路径

        Returns:
            tuple: (Field, time, eps)
        """
        valid, message = self.validate_file(path, expected="pfs")
        if not valid:
            raise ValueError(message)
        with open(path, "rb") as f:
            magic = f.readline()
            if magic != PFS_MAGIC:
                raise ValueError(f"'{path}' 不是PFS1快照文件")
            parts = f.readline().decode("ascii").split()
            if len(parts) != 6:
                raise ValueError(f"'{path}' 的快照头格式不正确")
            nx, ny = int(parts[0]), int(parts[1])
            Lx, Ly, time, eps = (float(p) for p in parts[2:])
            data = np.frombuffer(f.read(), dtype="<f8")
        if data.size != nx * ny:
            raise ValueError(f"'{path}' 的数据长度 {data.size} 与 {nx}×{ny} 不一致")
        spec = GridSpec(nx, ny, Lx, Ly)
        logger.debug(f"读取快照: {path} ({nx}×{ny}, t = {time:.6g})")
        return Field(spec, data.reshape(ny, nx)), time, eps

    def write_curve(self, path, curve):
        """写出曲线CSV，表头 "x,y"，每行一个顶点"""
        with open(path, "w", encoding="utf-8") as f:
            f.write(CURVE_HEADER + "\n")
            for x, y in curve.points:
                f.write(f"{float(x)!r},{float(y)!r}\n")

    def read_curve(self, path):
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip()
            if header != CURVE_HEADER:
                raise ValueError(f"'{path}' 的曲线表头不正确: {header!r}")
            points = [tuple(float(v) for v in line.split(",")) for line in f if line.strip()]
        return Curve(np.array(points))

    def write_timeseries(self, path, records):
        with open(path, "w", encoding="utf-8") as f:
            f.write(CSV_HEADER + "\n")
            for record in records:
                f.write(record.to_row() + "\n")

    def read_timeseries(self, path):
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"'{path}' 的时间序列表头不正确: {header!r}")
            return [TimeSeriesRecord.from_row(line) for line in f if line.strip()]

    def write_preview(self, path, u):
        """
        把场保存为灰度PNG预览，-1 映射为黑，+1 映射为白，y轴向上

        Args:
            path (str): 输出路径
            u (Field): 序参量场
        """
        gray = np.clip((np.asarray(u.values) + 1.0) * 127.5, 0.0, 255.0)
        image = Image.fromarray(np.flipud(gray).astype(np.uint8))
        image.save(path)
        logger.debug(f"写出预览图: {path}")


class RunWriter:
    """
    一次模拟的输出写入器

    时间序列逐行追加并立即刷新，中止时已写出的内容保留。
    快照写为 snapshot_{index:05d}.pfs，同时把最大的零水平集曲线写为 gamma_t{index}.csv。
    """

    def __init__(self, output_dir, eps, preview=False):
        self.output_dir = output_dir
        self.eps = eps
        self.preview = preview
        self.handler = FileHandler()
        os.makedirs(output_dir, exist_ok=True)
        self.timeseries_path = os.path.join(output_dir, "timeseries.csv")
        self._stream = open(self.timeseries_path, "w", encoding="utf-8")
        self._stream.write(CSV_HEADER + "\n")
        self._stream.flush()
        logger.info(f"输出目录: {output_dir}")

    def on_record(self, record):
        self._stream.write(record.to_row() + "\n")
        self._stream.flush()

    def on_snapshot(self, index, u, time):
        base = os.path.join(self.output_dir, f"snapshot_{index:05d}")
        self.handler.write_snapshot(base + ".pfs", u, time, self.eps)
        if self.preview:
            self.handler.write_preview(base + ".png", u)
        curve, _ = largest_component(extract_zero_levelset(u))
        if curve is not None:
            path = os.path.join(self.output_dir, f"gamma_t{index}.csv")
            self.handler.write_curve(path, curve)

    def close(self):
        if not self._stream.closed:
            self._stream.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        return False
