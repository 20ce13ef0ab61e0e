from .cli_io.main import main

raise SystemExit(main())
