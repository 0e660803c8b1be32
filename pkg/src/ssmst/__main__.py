from .cli_runner import main

raise SystemExit(main())
