import sys
from mcp.server.fastmcp import FastMCP
from config.settings import load_settings

# Import modular tools
from src.tools.experiment_ops import (
    evaluate_labels_tool,
    run_experiment_tool,
    synthesize_tool,
    train_tool,
)
# Import logger
from src.utils.errors import ConfigError
from src.utils.logger import logger

# Configure stdout for Windows Unicode support
if sys.platform == "win32":
    try:
        sys.stdout.reconfigure(encoding='utf-8')
    except (AttributeError, ValueError):
        pass

# 1. Validate runtime settings on startup
logger.info("🔍 Loading runtime settings...")
try:
    settings = load_settings()
except ConfigError as e:
    logger.error(f"Configuration error: {e}")
    sys.exit(1)  # Exit cleanly, don't crash

logger.setLevel(settings.log_level)
logger.info(f"✅ Settings loaded (out_dir={settings.out_dir}, jobs={settings.jobs}). Starting server...")

# 2. Initialize Server
mcp = FastMCP("PVC-MC")
logger.info("MCP server initialized: PVC-MC")

# 3. Register experiment tools
mcp.add_tool(run_experiment_tool)
mcp.add_tool(train_tool)
mcp.add_tool(evaluate_labels_tool)
mcp.add_tool(synthesize_tool)
logger.info("Experiment tools registered: run_experiment_tool, train_tool, evaluate_labels_tool, synthesize_tool")

if __name__ == "__main__":
    logger.success("Server ready")
    mcp.run()
