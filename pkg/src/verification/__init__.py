# Suite orchestration and reporting
