"""Configuration errors."""


class ConfigError(Exception):
    """Invalid or unknown configuration value; `key` names the offending setting."""
    reason = "ConfigError"

    def __init__(self, message: str, key: str = ""):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)
