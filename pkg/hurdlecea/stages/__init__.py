"""
Pipeline stages. Each stage takes the shared PipelineState, records its
output on it and appends to ``completed_steps``; failures go to ``errors``.
"""
