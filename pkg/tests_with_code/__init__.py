# Tests for Code Intelligence MCP Server
