"""
基础服务抽象类
为所有数值服务提供统一的接口、错误类型和基础功能
"""

from abc import ABC
from typing import Any, Dict, Optional
from logger.logger import get_logger

logger = get_logger(__name__)


class ServiceError(Exception):
    """服务错误基类"""

    def __init__(
        self,
        message: str,
        error_code: str = "SERVICE_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class DomainError(ServiceError):
    """参数超出定义域 (t ∉ [0,1]、线段离开区间等)"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "DOMAIN_ERROR", details)


class PreconditionError(ServiceError):
    """调用前置条件不满足"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "PRECONDITION_ERROR", details)


class NotApplicableError(ServiceError):
    """量不适用, 例如 σ 为 INFINITE 时的不动点残差"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "NOT_APPLICABLE", details)


class OrderingError(ServiceError):
    """比较定理要求的曲率顺序不成立"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "ORDERING_ERROR", details)


class TableFormatError(ServiceError):
    """输入表格格式错误, 带文件名与行号"""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(
            f"{path}:{line}: {message}",
            "VALIDATION_TABLE_ERROR",
            {"path": path, "line": line},
        )
        self.path = path
        self.line = line


class CheckFailedError(ServiceError):
    """检查器判定失败, details 中携带可复现的 witness"""

    def __init__(self, message: str, witness: Dict[str, Any]):
        super().__init__(message, "CHECK_FAILED", witness)


class BaseService(ABC):
    """
    基础服务抽象类
    """

    def __init__(
        self, service_name: str, config: Optional[Dict[str, Any]] = None
    ) -> None:
        self.service_name = service_name
        self.config = config or {}

    def setting(self, key: str, default: Any) -> Any:
        """读取本服务数值配置中的一个键"""
        return self.config.get(key, default)

    def log_request(self, action: str, details: Optional[Dict[str, Any]] = None) -> None:
        """记录操作日志"""
        logger.debug(f"[{self.service_name}] {action}: {details or {}}")


class ServiceRegistry:
    """服务注册表"""

    _services: Dict[str, BaseService] = {}

    @classmethod
    def register(cls, service_name: str, instance: BaseService) -> None:
        """注册服务"""
        cls._services[service_name] = instance
        logger.debug(f"✅ 服务已注册: {service_name}")

    @classmethod
    def get_service(cls, service_name: str) -> Optional[BaseService]:
        """获取服务"""
        return cls._services.get(service_name)

    @classmethod
    def list_services(cls) -> list[str]:
        """列出所有服务"""
        return list(cls._services.keys())
